//! Finite categories, set-valued functors, discrete fibrations and the
//! Grothendieck construction, plus its convex variant where fibres are
//! presented convex sets.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::presented::{quotient_mix, same_presentation, ConvexMap, EqualityStatus, Presentation, PresentedElement};
use crate::semiring::Rational;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Morphism {
    pub id: String,
    pub src: String,
    pub tgt: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteCategory {
    objects: Vec<String>,
    morphisms: BTreeMap<String, Morphism>,
    identities: BTreeMap<String, String>,
    /// `(g, f) ↦ g∘f` for every composable pair.
    compose: BTreeMap<(String, String), String>,
}

#[derive(Serialize, Deserialize)]
struct CategoryJson {
    objects: Vec<String>,
    morphisms: Vec<Morphism>,
    #[serde(default)]
    compose: Vec<(String, String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    identities: Option<BTreeMap<String, String>>,
}

impl FiniteCategory {
    /// Builds and validates a category. When `identities` is `None`, an
    /// identity `id_<object>` is added for every object. Composites with
    /// identities are filled in automatically.
    pub fn new(
        objects: Vec<String>,
        morphisms: Vec<Morphism>,
        identities: Option<BTreeMap<String, String>>,
        compose: Vec<(String, String, String)>,
    ) -> Result<Self> {
        let bad = |msg: String| Error::NotACategory(msg);
        let object_set: BTreeSet<&String> = objects.iter().collect();
        if object_set.len() != objects.len() {
            return Err(bad("duplicate object".into()));
        }
        let mut mors: BTreeMap<String, Morphism> = BTreeMap::new();
        for m in morphisms {
            if !object_set.contains(&m.src) || !object_set.contains(&m.tgt) {
                return Err(bad(format!("morphism {} has an unknown endpoint", m.id)));
            }
            if mors.insert(m.id.clone(), m.clone()).is_some() {
                return Err(bad(format!("duplicate morphism {}", m.id)));
            }
        }
        let identities = match identities {
            Some(ids) => ids,
            None => {
                let mut ids = BTreeMap::new();
                for o in &objects {
                    let id = format!("id_{o}");
                    if mors.contains_key(&id) {
                        return Err(bad(format!("identity name {id} is already taken")));
                    }
                    mors.insert(id.clone(), Morphism { id: id.clone(), src: o.clone(), tgt: o.clone() });
                    ids.insert(o.clone(), id);
                }
                ids
            }
        };
        for o in &objects {
            let Some(id) = identities.get(o) else { return Err(bad(format!("object {o} has no identity"))) };
            match mors.get(id) {
                Some(m) if &m.src == o && &m.tgt == o => {}
                _ => return Err(bad(format!("identity {id} of {o} is not an endomorphism of {o}"))),
            }
        }
        let mut table = BTreeMap::new();
        for (g, f, gf) in compose {
            for x in [&g, &f, &gf] {
                if !mors.contains_key(x) {
                    return Err(bad(format!("composition mentions unknown morphism {x}")));
                }
            }
            let (mg, mf, mgf) = (&mors[&g], &mors[&f], &mors[&gf]);
            if mf.tgt != mg.src {
                return Err(bad(format!("{g} ∘ {f} is not composable")));
            }
            if mgf.src != mf.src || mgf.tgt != mg.tgt {
                return Err(bad(format!("{g} ∘ {f} = {gf} has the wrong type")));
            }
            if let Some(prev) = table.insert((g.clone(), f.clone()), gf.clone()) {
                if prev != gf {
                    return Err(bad(format!("{g} ∘ {f} defined twice")));
                }
            }
        }
        for m in mors.values() {
            let (ids, idt) = (&identities[&m.src], &identities[&m.tgt]);
            for key in [(m.id.clone(), ids.clone()), (idt.clone(), m.id.clone())] {
                match table.get(&key) {
                    None => {
                        table.insert(key, m.id.clone());
                    }
                    Some(v) if v == &m.id => {}
                    Some(_) => return Err(bad(format!("identity law fails at {}", m.id))),
                }
            }
        }
        let cat = FiniteCategory { objects, morphisms: mors, identities, compose: table };
        cat.validate()?;
        Ok(cat)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Error::NotACategory(msg);
        for g in self.morphisms.values() {
            for f in self.morphisms.values() {
                let defined = self.compose.contains_key(&(g.id.clone(), f.id.clone()));
                if defined != (f.tgt == g.src) {
                    return Err(bad(format!("composition of {} after {} is missing", g.id, f.id)));
                }
            }
        }
        for ((g, f), gf) in &self.compose {
            for h in self.morphisms.values() {
                if h.src != self.morphisms[g].tgt {
                    continue;
                }
                let left = &self.compose[&(h.id.clone(), gf.clone())];
                let hg = &self.compose[&(h.id.clone(), g.clone())];
                let right = &self.compose[&(hg.clone(), f.clone())];
                if left != right {
                    return Err(bad(format!("associativity fails at {}, {g}, {f}", h.id)));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: CategoryJson = serde_json::from_str(text)?;
        Self::new(raw.objects, raw.morphisms, raw.identities, raw.compose)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let raw = CategoryJson {
            objects: self.objects.clone(),
            morphisms: self.morphisms.values().cloned().collect(),
            compose: self.compose.iter().map(|((g, f), gf)| (g.clone(), f.clone(), gf.clone())).collect(),
            identities: Some(self.identities.clone()),
        };
        serde_json::to_value(raw).expect("category serializes")
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn morphisms(&self) -> impl Iterator<Item = &Morphism> {
        self.morphisms.values()
    }

    pub fn morphism(&self, id: &str) -> Option<&Morphism> {
        self.morphisms.get(id)
    }

    pub fn identity(&self, obj: &str) -> &str {
        &self.identities[obj]
    }

    pub fn is_identity(&self, id: &str) -> bool {
        self.morphisms.get(id).is_some_and(|m| self.identities[&m.src] == id)
    }

    pub fn compose(&self, g: &str, f: &str) -> Option<&str> {
        self.compose.get(&(g.to_string(), f.to_string())).map(String::as_str)
    }

    pub fn hom(&self, a: &str, b: &str) -> Vec<&str> {
        self.morphisms.values().filter(|m| m.src == a && m.tgt == b).map(|m| m.id.as_str()).collect()
    }

    pub fn non_identity_count(&self) -> usize {
        self.morphisms.len() - self.objects.len()
    }

    /// A category on `0..n` with one arrow `i → j` exactly when `(i, j)` is
    /// in the (reflexive, transitive) relation.
    pub fn preorder(n: usize, relation: &BTreeSet<(usize, usize)>) -> Result<Self> {
        let objects: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let name = |i: usize, j: usize| format!("{i}<={j}");
        let arrows: Vec<(usize, usize)> = relation.iter().copied().filter(|(i, j)| i != j).collect();
        let morphisms = arrows
            .iter()
            .map(|&(i, j)| Morphism { id: name(i, j), src: i.to_string(), tgt: j.to_string() })
            .collect();
        let mut compose = Vec::new();
        for &(i, j) in &arrows {
            for &(j2, k) in &arrows {
                if j == j2 {
                    let gf = if i == k { format!("id_{i}") } else { name(i, k) };
                    if i != k && !relation.contains(&(i, k)) {
                        return Err(Error::NotACategory(format!("relation is not transitive at {i}, {j}, {k}")));
                    }
                    compose.push((name(j, k), name(i, j), gf));
                }
            }
        }
        Self::new(objects, morphisms, None, compose)
    }

    /// The walking arrow `0 → 1`.
    pub fn walking_arrow() -> Self {
        Self::preorder(2, &[(0, 1)].into_iter().collect()).expect("valid preorder")
    }

    /// The discrete category on `n` objects.
    pub fn discrete(n: usize) -> Self {
        Self::preorder(n, &BTreeSet::new()).expect("valid preorder")
    }

    /// The monoid generated by `a` with `a^(index + period) = a^index`,
    /// as a one-object category. Elements `a^1 … a^(index+period-1)` are
    /// the non-identity morphisms.
    pub fn cyclic_monoid(index: usize, period: usize) -> Result<Self> {
        if period == 0 {
            return Err(Error::InvalidInput("period must be positive".into()));
        }
        let size = index + period;
        let reduce = |m: usize| if m < size { m } else { index + (m - index) % period };
        let name = |k: usize| if k == 0 { "id_*".to_string() } else { format!("a^{k}") };
        let morphisms = (1..size).map(|k| Morphism { id: name(k), src: "*".into(), tgt: "*".into() }).collect();
        let mut compose = Vec::new();
        for k in 1..size {
            for l in 1..size {
                compose.push((name(k), name(l), name(reduce(k + l))));
            }
        }
        Self::new(vec!["*".into()], morphisms, None, compose)
    }

    /// The free category on an acyclic graph on `0..n`. Paths are named by
    /// their edges in traversal order, for example `e0;e2`.
    pub fn path_category(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let objects: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let mut paths: Vec<Vec<usize>> = (0..edges.len()).map(|e| vec![e]).collect();
        let mut frontier = paths.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for p in &frontier {
                let end = edges[*p.last().expect("nonempty")].1;
                for (e, &(s, _)) in edges.iter().enumerate() {
                    if s == end {
                        let mut q = p.clone();
                        q.push(e);
                        if q.len() > n {
                            return Err(Error::NotACategory("graph has a cycle".into()));
                        }
                        next.push(q);
                    }
                }
            }
            paths.extend(next.iter().cloned());
            frontier = next;
        }
        let pname = |p: &[usize]| p.iter().map(|e| format!("e{e}")).collect::<Vec<_>>().join(";");
        let morphisms = paths
            .iter()
            .map(|p| Morphism {
                id: pname(p),
                src: edges[p[0]].0.to_string(),
                tgt: edges[*p.last().expect("nonempty")].1.to_string(),
            })
            .collect();
        let mut compose = Vec::new();
        for f in &paths {
            for g in &paths {
                if edges[*f.last().expect("nonempty")].1 == edges[g[0]].0 {
                    let gf: Vec<usize> = f.iter().chain(g).copied().collect();
                    compose.push((pname(g), pname(f), pname(&gf)));
                }
            }
        }
        Self::new(objects, morphisms, None, compose)
    }
}

/// All preorders on `n` labelled points.
pub fn all_preorders(n: usize) -> Vec<FiniteCategory> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).collect();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        let rel: BTreeSet<(usize, usize)> =
            pairs.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, p)| *p).collect();
        let transitive = rel
            .iter()
            .all(|&(i, j)| rel.iter().filter(|(j2, _)| *j2 == j).all(|&(_, k)| i == k || rel.contains(&(i, k))));
        if transitive {
            out.push(FiniteCategory::preorder(n, &rel).expect("transitive relation"));
        }
    }
    out
}

/// A functor into finite sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetFunctor {
    category: Arc<FiniteCategory>,
    sets: BTreeMap<String, Vec<String>>,
    maps: BTreeMap<String, BTreeMap<String, String>>,
}

impl SetFunctor {
    pub fn new(
        category: Arc<FiniteCategory>,
        sets: BTreeMap<String, Vec<String>>,
        maps: BTreeMap<String, BTreeMap<String, String>>,
    ) -> Result<Self> {
        let f = SetFunctor { category, sets, maps };
        f.validate()?;
        Ok(f)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Error::NotAFunctor(msg);
        let cat = &self.category;
        for o in cat.objects() {
            let Some(set) = self.sets.get(o) else { return Err(bad(format!("no set for object {o}"))) };
            if set.iter().collect::<BTreeSet<_>>().len() != set.len() {
                return Err(bad(format!("set for {o} has duplicates")));
            }
        }
        for m in cat.morphisms() {
            let Some(map) = self.maps.get(&m.id) else { return Err(bad(format!("no map for {}", m.id))) };
            let (src, tgt) = (&self.sets[&m.src], &self.sets[&m.tgt]);
            if map.len() != src.len() || src.iter().any(|x| map.get(x).is_none_or(|y| !tgt.contains(y))) {
                return Err(bad(format!("map for {} is not a function {} -> {}", m.id, m.src, m.tgt)));
            }
            if cat.is_identity(&m.id) && map.iter().any(|(x, y)| x != y) {
                return Err(bad(format!("identity {} is not sent to an identity", m.id)));
            }
        }
        for ((g, f), gf) in &cat.compose {
            for x in &self.sets[&cat.morphisms[f].src] {
                if self.apply(g, self.apply(f, x)) != self.apply(gf, x) {
                    return Err(bad(format!("composition {g} ∘ {f} is not preserved at {x}")));
                }
            }
        }
        Ok(())
    }

    pub fn category(&self) -> &Arc<FiniteCategory> {
        &self.category
    }

    pub fn set(&self, obj: &str) -> &[String] {
        &self.sets[obj]
    }

    pub fn apply(&self, mor: &str, x: &str) -> &str {
        &self.maps[mor][x]
    }

    /// The constant one-point functor.
    pub fn terminal(category: &Arc<FiniteCategory>) -> Self {
        let sets = category.objects().iter().map(|o| (o.clone(), vec!["pt".to_string()])).collect();
        let maps = category
            .morphisms()
            .map(|m| (m.id.clone(), [("pt".to_string(), "pt".to_string())].into_iter().collect()))
            .collect();
        SetFunctor { category: category.clone(), sets, maps }
    }

    /// The representable `Hom(c, -)`.
    pub fn representable(category: &Arc<FiniteCategory>, c: &str) -> Result<Self> {
        let mut sets = BTreeMap::new();
        for d in category.objects() {
            sets.insert(d.clone(), category.hom(c, d).into_iter().map(String::from).collect::<Vec<_>>());
        }
        let mut maps = BTreeMap::new();
        for m in category.morphisms() {
            let map = sets[&m.src]
                .iter()
                .map(|h: &String| (h.clone(), category.compose(&m.id, h).expect("composable").to_string()))
                .collect();
            maps.insert(m.id.clone(), map);
        }
        Self::new(category.clone(), sets, maps)
    }

    /// Disjoint union; elements are tagged with the summand index.
    pub fn coproduct(parts: &[SetFunctor]) -> Result<Self> {
        let Some(first) = parts.first() else { return Err(Error::EmptyFactorList) };
        let category = first.category.clone();
        let tag = |k: usize, x: &str| crate::join::tagged(k, x);
        let mut sets: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut maps: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        for o in category.objects() {
            sets.insert(o.clone(), Vec::new());
        }
        for m in category.morphisms() {
            maps.insert(m.id.clone(), BTreeMap::new());
        }
        for (k, p) in parts.iter().enumerate() {
            if *p.category != *category {
                return Err(Error::NotAFunctor("summands live on different categories".into()));
            }
            for (o, set) in &p.sets {
                sets.get_mut(o).expect("object").extend(set.iter().map(|x| tag(k, x)));
            }
            for (m, map) in &p.maps {
                maps.get_mut(m).expect("morphism").extend(map.iter().map(|(x, y)| (tag(k, x), tag(k, y))));
            }
        }
        Self::new(category, sets, maps)
    }

    /// A functor on a path category given freely by maps on the edges.
    pub fn on_paths(
        category: &Arc<FiniteCategory>,
        sets: BTreeMap<String, Vec<String>>,
        edge_maps: &[BTreeMap<String, String>],
    ) -> Result<Self> {
        let mut maps = BTreeMap::new();
        for m in category.morphisms() {
            let map = sets
                .get(&m.src)
                .ok_or_else(|| Error::NotAFunctor(format!("no set for {}", m.src)))?
                .iter()
                .map(|x| {
                    let mut y = x.clone();
                    if !category.is_identity(&m.id) {
                        for e in m.id.split(';') {
                            let k: usize = e[1..].parse().map_err(|_| Error::NotAFunctor(format!("bad edge {e}")))?;
                            let em = edge_maps.get(k).ok_or_else(|| Error::NotAFunctor(format!("no map for {e}")))?;
                            y = em.get(&y).ok_or_else(|| Error::NotAFunctor(format!("{e} undefined at {y}")))?.clone();
                        }
                    }
                    Ok((x.clone(), y))
                })
                .collect::<Result<_>>()?;
            maps.insert(m.id.clone(), map);
        }
        Self::new(category.clone(), sets, maps)
    }
}

/// Components of a natural transformation between set functors.
pub type Components = BTreeMap<String, BTreeMap<String, String>>;

/// Checks that `eta: F ⇒ G` is natural with bijective components.
pub fn is_natural_isomorphism(f: &SetFunctor, g: &SetFunctor, eta: &Components) -> bool {
    if *f.category != *g.category {
        return false;
    }
    let cat = &f.category;
    for o in cat.objects() {
        let Some(comp) = eta.get(o) else { return false };
        let image: BTreeSet<&String> = comp.values().collect();
        let target: BTreeSet<&String> = g.set(o).iter().collect();
        if comp.len() != f.set(o).len() || image != target || image.len() != comp.len() {
            return false;
        }
        if f.set(o).iter().any(|x| !comp.contains_key(x)) {
            return false;
        }
    }
    cat.morphisms().all(|m| {
        f.set(&m.src).iter().all(|x| eta[&m.tgt][f.apply(&m.id, x)] == g.apply(&m.id, &eta[&m.src][x]))
    })
}

/// A functor between finite categories.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Functor {
    pub source: Arc<FiniteCategory>,
    pub target: Arc<FiniteCategory>,
    pub on_objects: BTreeMap<String, String>,
    pub on_morphisms: BTreeMap<String, String>,
}

impl Functor {
    pub fn is_valid(&self) -> bool {
        let (s, t) = (&self.source, &self.target);
        s.morphisms().all(|m| {
            let Some(fm) = self.on_morphisms.get(&m.id).and_then(|x| t.morphism(x)) else { return false };
            self.on_objects.get(&m.src) == Some(&fm.src) && self.on_objects.get(&m.tgt) == Some(&fm.tgt)
        }) && s.objects().iter().all(|o| {
            self.on_objects.get(o).is_some_and(|fo| self.on_morphisms[s.identity(o)] == t.identity(fo))
        }) && s.compose.iter().all(|((g, f), gf)| {
            t.compose(&self.on_morphisms[g], &self.on_morphisms[f]) == Some(self.on_morphisms[gf].as_str())
        })
    }
}

/// A total category with a projection to a base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FibrationData {
    pub projection: Functor,
}

impl FibrationData {
    pub fn total(&self) -> &Arc<FiniteCategory> {
        &self.projection.source
    }

    pub fn base(&self) -> &Arc<FiniteCategory> {
        &self.projection.target
    }

    /// Total morphisms over `f` with source `x`.
    pub fn lifts(&self, f: &str, x: &str) -> Vec<&Morphism> {
        self.total()
            .morphisms()
            .filter(|m| m.src == x && self.projection.on_morphisms[&m.id] == f)
            .collect()
    }

    pub fn fibre(&self, c: &str) -> Vec<&String> {
        self.total().objects().iter().filter(|x| self.projection.on_objects[*x] == c).collect()
    }
}

/// Name of the total object or morphism `(c, x)`.
pub fn pair_name(c: &str, x: &str) -> String {
    serde_json::to_string(&[c, x]).expect("pair serializes")
}

/// The category of elements of `F` with its projection.
pub fn grothendieck(f: &SetFunctor) -> Result<FibrationData> {
    f.validate()?;
    let base = &f.category;
    let mut objects = Vec::new();
    let mut on_objects = BTreeMap::new();
    for c in base.objects() {
        for x in f.set(c) {
            let name = pair_name(c, x);
            on_objects.insert(name.clone(), c.clone());
            objects.push(name);
        }
    }
    let mut morphisms = Vec::new();
    let mut on_morphisms = BTreeMap::new();
    for m in base.morphisms() {
        for x in f.set(&m.src) {
            let id = pair_name(&m.id, x);
            morphisms.push(Morphism { id: id.clone(), src: pair_name(&m.src, x), tgt: pair_name(&m.tgt, f.apply(&m.id, x)) });
            on_morphisms.insert(id, m.id.clone());
        }
    }
    let identities = base
        .objects()
        .iter()
        .flat_map(|c| f.set(c).iter().map(move |x| (pair_name(c, x), pair_name(base.identity(c), x))))
        .collect();
    let mut compose = Vec::new();
    for ((g, h), gh) in &base.compose {
        for x in f.set(&base.morphisms[h].src) {
            let y = f.apply(h, x);
            compose.push((pair_name(g, y), pair_name(h, x), pair_name(gh, x)));
        }
    }
    let total = FiniteCategory::new(objects, morphisms, Some(identities), compose)?;
    Ok(FibrationData {
        projection: Functor { source: Arc::new(total), target: base.clone(), on_objects, on_morphisms },
    })
}

/// Unique lifting of every base morphism from every object over its source.
pub fn is_discrete_fibration(p: &FibrationData) -> bool {
    if !p.projection.is_valid() {
        return false;
    }
    p.base().morphisms().all(|f| p.fibre(&f.src).iter().all(|x| p.lifts(&f.id, x).len() == 1))
}

/// The functor of fibres: `F(c)` is the fibre over `c`, `F(f)(x)` the
/// target of the unique lift.
pub fn extract_functor(p: &FibrationData) -> Result<SetFunctor> {
    if !is_discrete_fibration(p) {
        return Err(Error::NotAFibration("some base morphism does not lift uniquely".into()));
    }
    let base = p.base().clone();
    let sets = base.objects().iter().map(|c| (c.clone(), p.fibre(c).into_iter().cloned().collect())).collect();
    let maps = base
        .morphisms()
        .map(|f| {
            let map = p.fibre(&f.src).into_iter().map(|x| (x.clone(), p.lifts(&f.id, x)[0].tgt.clone())).collect();
            (f.id.clone(), map)
        })
        .collect();
    SetFunctor::new(base, sets, maps)
}

/// The isomorphism `F ≅ extract(grothendieck(F))`, `x ↦ (c, x)`.
pub fn unit_isomorphism(f: &SetFunctor) -> Components {
    f.category
        .objects()
        .iter()
        .map(|c| (c.clone(), f.set(c).iter().map(|x| (x.clone(), pair_name(c, x))).collect()))
        .collect()
}

/// The comparison `grothendieck(extract(p)) → p` over the base:
/// `(c, x) ↦ x` on objects and `(f, x) ↦` the lift of `f` at `x`.
pub fn counit_functor(p: &FibrationData) -> Result<Functor> {
    let rebuilt = grothendieck(&extract_functor(p)?)?;
    let on_objects = rebuilt
        .total()
        .objects()
        .iter()
        .map(|o| {
            let pair: [String; 2] = serde_json::from_str(o).expect("pair name");
            (o.clone(), pair[1].clone())
        })
        .collect();
    let on_morphisms = rebuilt
        .total()
        .morphisms()
        .map(|m| {
            let pair: [String; 2] = serde_json::from_str(&m.id).expect("pair name");
            (m.id.clone(), p.lifts(&pair[0], &pair[1])[0].id.clone())
        })
        .collect();
    Ok(Functor { source: rebuilt.total().clone(), target: p.total().clone(), on_objects, on_morphisms })
}

/// A functor that is bijective on objects and morphisms and commutes with
/// the projections is an isomorphism of fibrations.
pub fn is_fibration_isomorphism(phi: &Functor, from: &FibrationData, to: &FibrationData) -> bool {
    let injective = |m: &BTreeMap<String, String>, n: usize| m.values().collect::<BTreeSet<_>>().len() == n && m.len() == n;
    phi.is_valid()
        && from.base() == to.base()
        && injective(&phi.on_objects, to.total().objects().len())
        && injective(&phi.on_morphisms, to.total().morphisms.len())
        && phi.on_objects.iter().all(|(x, y)| from.projection.on_objects[x] == to.projection.on_objects[y])
        && phi.on_morphisms.iter().all(|(x, y)| from.projection.on_morphisms[x] == to.projection.on_morphisms[y])
}

/// A projection onto the walking arrow that fails to lift the arrow.
pub fn non_lifting_example() -> FibrationData {
    let base = Arc::new(FiniteCategory::walking_arrow());
    let total = FiniteCategory::new(vec!["x".into(), "y".into()], vec![], None, vec![]).expect("discrete");
    FibrationData {
        projection: Functor {
            source: Arc::new(total),
            target: base,
            on_objects: [("x".to_string(), "0".to_string()), ("y".to_string(), "1".to_string())].into_iter().collect(),
            on_morphisms: [("id_x".to_string(), "id_0".to_string()), ("id_y".to_string(), "id_1".to_string())]
                .into_iter()
                .collect(),
        },
    }
}

/// A functor from a finite category into presented convex sets.
#[derive(Clone, Debug)]
pub struct CSetFunctor {
    category: Arc<FiniteCategory>,
    objects: BTreeMap<String, Arc<Presentation>>,
    morphisms: BTreeMap<String, ConvexMap>,
}

impl CSetFunctor {
    /// Validates functoriality with the equality engine; undecided
    /// comparisons are errors.
    pub fn new(
        category: Arc<FiniteCategory>,
        objects: BTreeMap<String, Arc<Presentation>>,
        morphisms: BTreeMap<String, ConvexMap>,
        bound: usize,
    ) -> Result<Self> {
        let bad = |msg: String| Error::NotAFunctor(msg);
        for o in category.objects() {
            if !objects.contains_key(o) {
                return Err(bad(format!("no convex set for {o}")));
            }
        }
        for m in category.morphisms() {
            let Some(fm) = morphisms.get(&m.id) else { return Err(bad(format!("no map for {}", m.id))) };
            if !same_presentation(fm.source(), &objects[&m.src]) || !same_presentation(fm.target(), &objects[&m.tgt]) {
                return Err(bad(format!("map for {} has the wrong signature", m.id)));
            }
            fm.check_well_defined(bound).map_err(|e| bad(format!("{}: {e}", m.id)))?;
            if category.is_identity(&m.id) {
                let ok = fm.agrees_with(&ConvexMap::identity(&objects[&m.src]), bound).map_err(|e| bad(e.to_string()))?;
                if !ok {
                    return Err(bad(format!("identity {} is not sent to an identity", m.id)));
                }
            }
        }
        for ((g, f), gf) in &category.compose {
            let composite = morphisms[g].after(&morphisms[f])?;
            if !composite.agrees_with(&morphisms[gf], bound).map_err(|e| bad(e.to_string()))? {
                return Err(bad(format!("composition {g} ∘ {f} is not preserved")));
            }
        }
        Ok(CSetFunctor { category, objects, morphisms })
    }

    /// `c ↦ D(F(c))` with pushforward maps.
    pub fn free_on(f: &SetFunctor) -> Result<Self> {
        let objects: BTreeMap<String, Arc<Presentation>> = f
            .category
            .objects()
            .iter()
            .map(|c| Ok((c.clone(), Arc::new(Presentation::free(f.set(c).iter().cloned())?))))
            .collect::<Result<_>>()?;
        let morphisms = f
            .category
            .morphisms()
            .map(|m| {
                let images = f.set(&m.src).iter().map(|x| (x.clone(), Distribution::delta(f.apply(&m.id, x).to_string()))).collect();
                Ok((m.id.clone(), ConvexMap::from_images_unchecked(objects[&m.src].clone(), objects[&m.tgt].clone(), images)?))
            })
            .collect::<Result<_>>()?;
        Self::new(f.category.clone(), objects, morphisms, 0)
    }

    /// The constant functor at `pres`.
    pub fn constant(category: &Arc<FiniteCategory>, pres: &Arc<Presentation>) -> Self {
        CSetFunctor {
            category: category.clone(),
            objects: category.objects().iter().map(|o| (o.clone(), pres.clone())).collect(),
            morphisms: category.morphisms().map(|m| (m.id.clone(), ConvexMap::identity(pres))).collect(),
        }
    }

    pub fn category(&self) -> &Arc<FiniteCategory> {
        &self.category
    }

    pub fn object(&self, c: &str) -> &Arc<Presentation> {
        &self.objects[c]
    }

    pub fn morphism(&self, f: &str) -> &ConvexMap {
        &self.morphisms[f]
    }

    /// Pointwise comparison of two functors on the same category.
    pub fn agrees_with(&self, other: &CSetFunctor, bound: usize) -> Result<bool> {
        if *self.category != *other.category || self.objects != other.objects {
            return Ok(false);
        }
        for (k, m) in &self.morphisms {
            if !m.agrees_with(&other.morphisms[k], bound)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TotalObject {
    pub base: String,
    pub element: PresentedElement,
}

/// A total morphism is determined by its base morphism and its source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TotalMorphism {
    pub base: String,
    pub source: PresentedElement,
}

/// The convex Grothendieck construction, kept lazy because fibres are
/// usually infinite.
#[derive(Clone, Debug)]
pub struct ConvexFibration {
    functor: CSetFunctor,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FibrewiseCheck {
    pub source: bool,
    pub target: bool,
    pub identity: bool,
}

impl FibrewiseCheck {
    pub fn all(&self) -> bool {
        self.source && self.target && self.identity
    }
}

pub fn convex_grothendieck(f: &CSetFunctor) -> ConvexFibration {
    ConvexFibration { functor: f.clone() }
}

impl ConvexFibration {
    pub fn functor(&self) -> &CSetFunctor {
        &self.functor
    }

    pub fn contains_object(&self, base: &str, rep: &Distribution) -> bool {
        self.functor.objects.get(base).is_some_and(|p| p.supports(rep))
    }

    pub fn object(&self, base: &str, rep: Distribution) -> Result<TotalObject> {
        let pres = self.functor.objects.get(base).ok_or(Error::InvalidInput(format!("unknown object {base}")))?;
        Ok(TotalObject { base: base.to_string(), element: pres.element(rep)? })
    }

    /// The unique lift of `f` starting at `x`.
    pub fn lift(&self, f: &str, x: &TotalObject) -> Result<TotalMorphism> {
        let m = self.functor.category.morphism(f).ok_or(Error::InvalidInput(format!("unknown morphism {f}")))?;
        if m.src != x.base {
            return Err(Error::NotAFibration(format!("{f} does not start at {}", x.base)));
        }
        Ok(TotalMorphism { base: f.to_string(), source: x.element.clone() })
    }

    pub fn source(&self, m: &TotalMorphism) -> TotalObject {
        let src = &self.functor.category.morphism(&m.base).expect("known morphism").src;
        TotalObject { base: src.clone(), element: m.source.clone() }
    }

    pub fn target(&self, m: &TotalMorphism) -> Result<TotalObject> {
        let tgt = &self.functor.category.morphism(&m.base).expect("known morphism").tgt;
        Ok(TotalObject { base: tgt.clone(), element: self.functor.morphisms[&m.base].evaluate(&m.source)? })
    }

    pub fn identity(&self, x: &TotalObject) -> TotalMorphism {
        TotalMorphism { base: self.functor.category.identity(&x.base).to_string(), source: x.element.clone() }
    }

    pub fn compose(&self, g: &TotalMorphism, f: &TotalMorphism) -> Result<TotalMorphism> {
        let base = self
            .functor
            .category
            .compose(&g.base, &f.base)
            .ok_or(Error::InvalidInput(format!("{} and {} are not composable", g.base, f.base)))?;
        Ok(TotalMorphism { base: base.to_string(), source: f.source.clone() })
    }

    pub fn mix_objects(&self, alpha: &[Rational], xs: &[TotalObject]) -> Result<TotalObject> {
        let base = &xs.first().ok_or(Error::EmptyFactorList)?.base;
        if xs.iter().any(|x| &x.base != base) {
            return Err(Error::InvalidInput("objects lie in different fibres".into()));
        }
        let els: Vec<PresentedElement> = xs.iter().map(|x| x.element.clone()).collect();
        Ok(TotalObject { base: base.clone(), element: quotient_mix(alpha, &els)? })
    }

    /// Mixes morphisms in the fibre over one base morphism.
    pub fn mix_morphisms(&self, alpha: &[Rational], ms: &[TotalMorphism]) -> Result<TotalMorphism> {
        let base = &ms.first().ok_or(Error::EmptyFactorList)?.base;
        if ms.iter().any(|m| &m.base != base) {
            return Err(Error::InvalidInput("morphisms lie over different base morphisms".into()));
        }
        let els: Vec<PresentedElement> = ms.iter().map(|m| m.source.clone()).collect();
        Ok(TotalMorphism { base: base.clone(), source: quotient_mix(alpha, &els)? })
    }

    fn same(&self, a: &TotalObject, b: &TotalObject, bound: usize) -> Result<bool> {
        if a.base != b.base {
            return Ok(false);
        }
        Ok(crate::presented::eq(&a.element, &b.element, bound)?.status() == EqualityStatus::Equal)
    }

    /// The three fibrewise convexity equations for one combination of
    /// morphisms over a common base morphism.
    pub fn check_fibrewise(&self, alpha: &[Rational], ms: &[TotalMorphism], bound: usize) -> Result<FibrewiseCheck> {
        let mix = self.mix_morphisms(alpha, ms)?;
        let sources: Vec<TotalObject> = ms.iter().map(|m| self.source(m)).collect();
        let targets: Vec<TotalObject> = ms.iter().map(|m| self.target(m)).collect::<Result<_>>()?;
        let source = self.same(&self.source(&mix), &self.mix_objects(alpha, &sources)?, bound)?;
        let target = self.same(&self.target(&mix)?, &self.mix_objects(alpha, &targets)?, bound)?;
        let id_of_mix = self.identity(&self.mix_objects(alpha, &sources)?);
        let ids: Vec<TotalMorphism> = sources.iter().map(|x| self.identity(x)).collect();
        let mix_of_ids = self.mix_morphisms(alpha, &ids)?;
        let identity = id_of_mix.base == mix_of_ids.base
            && self.same(&self.source(&id_of_mix), &self.source(&mix_of_ids), bound)?;
        Ok(FibrewiseCheck { source, target, identity })
    }

    /// Enumerates the total category when every fibre has at most one
    /// generator (hence at most one element).
    pub fn enumerate(&self) -> Option<FibrationData> {
        if self.functor.objects.values().any(|p| p.generators().len() > 1) {
            return None;
        }
        let sets = self.functor.objects.iter().map(|(c, p)| (c.clone(), p.generators().to_vec())).collect();
        let maps = self
            .functor
            .morphisms
            .iter()
            .map(|(f, m)| {
                let map = m
                    .images()
                    .iter()
                    .map(|(x, img)| (x.clone(), img.is_delta().expect("single generator target").clone()))
                    .collect();
                (f.clone(), map)
            })
            .collect();
        let set_functor = SetFunctor::new(self.functor.category.clone(), sets, maps).ok()?;
        grothendieck(&set_functor).ok()
    }

    /// Recovers the functor by lifting generators.
    pub fn extract(&self, bound: usize) -> Result<CSetFunctor> {
        let mut morphisms = BTreeMap::new();
        for m in self.functor.category.morphisms() {
            let src = &self.functor.objects[&m.src];
            let mut images = BTreeMap::new();
            for g in src.generators() {
                let x = self.object(&m.src, Distribution::delta(g.clone()))?;
                let t = self.target(&self.lift(&m.id, &x)?)?;
                images.insert(g.clone(), t.element.into_rep());
            }
            morphisms.insert(
                m.id.clone(),
                ConvexMap::from_images_unchecked(src.clone(), self.functor.objects[&m.tgt].clone(), images)?,
            );
        }
        CSetFunctor::new(self.functor.category.clone(), self.functor.objects.clone(), morphisms, bound)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{delta, dist};
    use crate::semiring::q;

    fn map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    fn two_to_one() -> SetFunctor {
        let cat = Arc::new(FiniteCategory::walking_arrow());
        let sets = [("0".to_string(), vec!["a".to_string(), "b".to_string()]), ("1".to_string(), vec!["z".to_string()])]
            .into_iter()
            .collect();
        let maps = [
            ("0<=1".to_string(), map(&[("a", "z"), ("b", "z")])),
            ("id_0".to_string(), map(&[("a", "a"), ("b", "b")])),
            ("id_1".to_string(), map(&[("z", "z")])),
        ]
        .into_iter()
        .collect();
        SetFunctor::new(cat, sets, maps).unwrap()
    }

    #[test]
    fn category_validation() {
        assert_eq!(FiniteCategory::walking_arrow().non_identity_count(), 1);
        let bad = FiniteCategory::new(
            vec!["a".into()],
            vec![Morphism { id: "f".into(), src: "a".into(), tgt: "a".into() }],
            None,
            vec![],
        );
        assert!(matches!(bad, Err(Error::NotACategory(_))));
        let z3 = FiniteCategory::cyclic_monoid(0, 3).unwrap();
        assert_eq!(z3.compose("a^2", "a^1"), Some("id_*"));
        let idem = FiniteCategory::cyclic_monoid(1, 1).unwrap();
        assert_eq!(idem.compose("a^1", "a^1"), Some("a^1"));
        let paths = FiniteCategory::path_category(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(paths.hom("0", "2").len(), 2);
        assert!(FiniteCategory::path_category(2, &[(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn preorder_counts() {
        let counts: Vec<usize> = (0..=4).map(|n| all_preorders(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 4, 29, 355]);
    }

    #[test]
    fn category_json_round_trip() {
        let text = r#"{"objects":["a","b"],"morphisms":[{"id":"f","src":"a","tgt":"b"}],"compose":[]}"#;
        let cat = FiniteCategory::from_json(text).unwrap();
        assert_eq!(cat.identity("a"), "id_a");
        let back = FiniteCategory::from_json(&cat.to_json().to_string()).unwrap();
        assert_eq!(back, cat);
    }

    #[test]
    fn terminal_functor_gives_isomorphic_projection() {
        let cat = Arc::new(FiniteCategory::path_category(3, &[(0, 1), (1, 2)]).unwrap());
        let p = grothendieck(&SetFunctor::terminal(&cat)).unwrap();
        assert!(is_discrete_fibration(&p));
        assert_eq!(p.total().objects().len(), cat.objects().len());
        assert_eq!(p.total().morphisms().count(), cat.morphisms().count());
    }

    #[test]
    fn walking_arrow_elements() {
        let f = two_to_one();
        let p = grothendieck(&f).unwrap();
        assert_eq!(p.total().objects().len(), 3);
        assert!(is_discrete_fibration(&p));
        let back = extract_functor(&p).unwrap();
        assert!(is_natural_isomorphism(&f, &back, &unit_isomorphism(&f)));
        let phi = counit_functor(&p).unwrap();
        let rebuilt = grothendieck(&back).unwrap();
        assert!(is_fibration_isomorphism(&phi, &rebuilt, &p));
    }

    #[test]
    fn non_lifting_projection_is_rejected() {
        let p = non_lifting_example();
        assert!(p.projection.is_valid());
        assert!(!is_discrete_fibration(&p));
        assert!(matches!(extract_functor(&p), Err(Error::NotAFibration(_))));
    }

    #[test]
    fn representables_and_coproducts() {
        let cat = Arc::new(FiniteCategory::cyclic_monoid(1, 2).unwrap());
        let r = SetFunctor::representable(&cat, "*").unwrap();
        assert_eq!(r.set("*").len(), 3);
        let sum = SetFunctor::coproduct(&[r.clone(), SetFunctor::terminal(&cat)]).unwrap();
        let p = grothendieck(&sum).unwrap();
        assert!(is_discrete_fibration(&p));
    }

    #[test]
    fn convex_fibres_satisfy_the_equations() {
        let f = CSetFunctor::free_on(&two_to_one()).unwrap();
        let fib = convex_grothendieck(&f);
        let x1 = fib.object("0", delta("a")).unwrap();
        let x2 = fib.object("0", dist(&[("a", q(1, 3)), ("b", q(2, 3))])).unwrap();
        let ms = [fib.lift("0<=1", &x1).unwrap(), fib.lift("0<=1", &x2).unwrap()];
        let check = fib.check_fibrewise(&[q(1, 4), q(3, 4)], &ms, 2).unwrap();
        assert!(check.all(), "{check:?}");
        assert!(fib.extract(2).unwrap().agrees_with(&f, 2).unwrap());
        assert!(fib.enumerate().is_none());
    }

    #[test]
    fn singleton_fibres_enumerate() {
        let cat = Arc::new(FiniteCategory::walking_arrow());
        let point = Arc::new(Presentation::free(["p"]).unwrap());
        let fib = convex_grothendieck(&CSetFunctor::constant(&cat, &point));
        let total = fib.enumerate().unwrap();
        assert!(is_discrete_fibration(&total));
        assert_eq!(total.total().objects().len(), 2);
    }

    #[test]
    fn non_functorial_assignment_is_rejected() {
        let cat = Arc::new(FiniteCategory::cyclic_monoid(0, 2).unwrap());
        let x = Arc::new(Presentation::free(["u", "v"]).unwrap());
        // a ↦ constant u, but a∘a = id needs an involution.
        let constant = ConvexMap::constant(&x, &x.generator("u").unwrap());
        let morphisms = [("id_*".to_string(), ConvexMap::identity(&x)), ("a^1".to_string(), constant)].into_iter().collect();
        let objects = [("*".to_string(), x.clone())].into_iter().collect();
        assert!(matches!(CSetFunctor::new(cat, objects, morphisms, 2), Err(Error::NotAFunctor(_))));
    }
}
