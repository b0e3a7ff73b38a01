//! Finitely presented convex sets.
//!
//! A [`Presentation`] is a finite generator set together with relation
//! pairs of distributions over the generators. Its elements are
//! distributions over the generators, taken modulo the smallest convex
//! equivalence relation containing the relation pairs.
//!
//! Equality of elements is decided three ways:
//!
//! * `Equal` when a zig-zag of at most `bound` one-step moves connects the
//!   representatives. A one-step move from `p` to `q` is a choice of
//!   nonnegative weights `λ_j` on (symmetrized) relation pairs and a
//!   nonnegative spectator `t` with `p = Σ λ_j r_j + t` and
//!   `q = Σ λ_j s_j + t`. A whole `k`-step zig-zag is one exact LP.
//! * `Distinct` when some affine functional is constant on every relation
//!   pair but separates the two representatives. Such functionals are
//!   invariant along moves, so this is sound.
//! * `Unknown` otherwise. No completeness is claimed.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::distribution::{convex_combine, Distribution};
use crate::error::{Error, Result};
use crate::lp::{solve_linear_system, FeasibilityProblem};
use crate::semiring::{format_rational, Rational};

/// Step bound used when none is configured.
pub const DEFAULT_STEP_BOUND: usize = 4;

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PresentationJson")]
pub struct Presentation {
    generators: Vec<String>,
    relations: Vec<(Distribution, Distribution)>,
    #[serde(skip)]
    index: BTreeMap<String, usize>,
}

#[derive(Deserialize)]
struct PresentationJson {
    generators: Vec<String>,
    #[serde(default)]
    relations: Vec<(Distribution, Distribution)>,
}

impl TryFrom<PresentationJson> for Presentation {
    type Error = Error;

    fn try_from(raw: PresentationJson) -> Result<Self> {
        Presentation::new(raw.generators, raw.relations)
    }
}

impl Presentation {
    pub fn new(generators: Vec<String>, relations: Vec<(Distribution, Distribution)>) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, g) in generators.iter().enumerate() {
            if index.insert(g.clone(), i).is_some() {
                return Err(Error::InvalidPresentation(format!("duplicate generator {g:?}")));
            }
        }
        for (j, (r, s)) in relations.iter().enumerate() {
            for x in r.support().chain(s.support()) {
                if !index.contains_key(x) {
                    return Err(Error::InvalidPresentation(format!(
                        "relation {j} mentions unknown generator {x:?}"
                    )));
                }
            }
        }
        Ok(Presentation { generators, relations, index })
    }

    /// The free convex set on `generators`.
    pub fn free<I, G>(generators: I) -> Result<Self>
    where
        I: IntoIterator<Item = G>,
        G: Into<String>,
    {
        Self::new(generators.into_iter().map(Into::into).collect(), Vec::new())
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn relations(&self) -> &[(Distribution, Distribution)] {
        &self.relations
    }

    pub fn is_free(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn contains_generator(&self, g: &str) -> bool {
        self.index.contains_key(g)
    }

    pub fn index_of(&self, g: &str) -> Option<usize> {
        self.index.get(g).copied()
    }

    pub fn supports(&self, p: &Distribution) -> bool {
        p.supported_on(|x| self.index.contains_key(x))
    }

    /// Dense weight vector of `p` in generator order.
    pub fn to_vector(&self, p: &Distribution) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.generators.len()];
        for (x, w) in p.iter() {
            v[self.index[x]] = w.clone();
        }
        v
    }

    fn vector_to_distribution(&self, v: &[Rational]) -> Distribution {
        Distribution::accumulate(self.generators.iter().cloned().zip(v.iter().cloned()))
    }

    pub fn element(self: &Arc<Self>, rep: Distribution) -> Result<PresentedElement> {
        PresentedElement::new(self.clone(), rep)
    }

    pub fn generator(self: &Arc<Self>, g: &str) -> Result<PresentedElement> {
        self.element(Distribution::delta(g.to_string()))
    }

    /// Relation pairs in both orientations: index `2j` is `(r_j, s_j)` and
    /// `2j + 1` is `(s_j, r_j)`.
    fn oriented_relations(&self) -> Vec<(Vec<Rational>, Vec<Rational>)> {
        self.relations
            .iter()
            .flat_map(|(r, s)| {
                let (r, s) = (self.to_vector(r), self.to_vector(s));
                [(r.clone(), s.clone()), (s, r)]
            })
            .collect()
    }

    /// Decides equality of two representatives.
    pub fn decide(&self, p: &Distribution, q: &Distribution, bound: usize) -> Result<EqualityVerdict> {
        if !self.supports(p) || !self.supports(q) {
            return Err(Error::PresentationMismatch);
        }
        if p == q {
            return Ok(EqualityVerdict::Equal(ZigZag { steps: Vec::new() }));
        }
        if let Some(inv) = self.separating_invariant(p, q) {
            return Ok(EqualityVerdict::Distinct(inv));
        }
        if bound == 0 || self.relations.is_empty() {
            return Ok(EqualityVerdict::Unknown { bound });
        }
        // Feasibility at the full bound first: an infeasible answer here
        // settles Unknown with a single LP.
        let Some(path) = self.zigzag(p, q, bound) else {
            return Ok(EqualityVerdict::Unknown { bound });
        };
        for k in 1..bound {
            if let Some(short) = self.zigzag(p, q, k) {
                return Ok(EqualityVerdict::Equal(short));
            }
        }
        Ok(EqualityVerdict::Equal(path))
    }

    fn separating_invariant(&self, p: &Distribution, q: &Distribution) -> Option<AffineInvariant> {
        let n = self.generators.len();
        let mut rows = Vec::with_capacity(self.relations.len() + 1);
        let mut rhs = Vec::with_capacity(self.relations.len() + 1);
        for (r, s) in &self.relations {
            let (r, s) = (self.to_vector(r), self.to_vector(s));
            rows.push(r.iter().zip(&s).map(|(a, b)| a - b).collect());
            rhs.push(Rational::zero());
        }
        let (pv, qv) = (self.to_vector(p), self.to_vector(q));
        rows.push(pv.iter().zip(&qv).map(|(a, b)| a - b).collect());
        rhs.push(Rational::one());
        let phi = solve_linear_system(&rows, &rhs, n)?;
        Some(AffineInvariant {
            values: self.generators.iter().cloned().zip(phi).filter(|(_, v)| !v.is_zero()).collect(),
        })
    }

    /// Looks for a zig-zag of exactly `k` one-step moves (identity moves
    /// allowed, so this also covers shorter paths).
    fn zigzag(&self, p: &Distribution, q: &Distribution, k: usize) -> Option<ZigZag> {
        let n = self.generators.len();
        let rels = self.oriented_relations();
        let m2 = rels.len();
        let per_step = m2 + n;
        let inter = (k - 1) * n;
        let mid = |i: usize, g: usize| (i - 1) * n + g;
        let lam = |i: usize, j: usize| inter + (i - 1) * per_step + j;
        let spec = |i: usize, g: usize| inter + (i - 1) * per_step + m2 + g;

        let (pv, qv) = (self.to_vector(p), self.to_vector(q));
        let mut lp = FeasibilityProblem::new(inter + k * per_step);
        for i in 1..=k {
            for g in 0..n {
                // from-side: p_{i-1}[g] = Σ λ r[g] + t[g]
                let mut terms: Vec<(usize, Rational)> = Vec::new();
                let mut rhs = Rational::zero();
                if i == 1 {
                    rhs = -pv[g].clone();
                } else {
                    terms.push((mid(i - 1, g), Rational::one()));
                }
                for (j, (r, _)) in rels.iter().enumerate() {
                    if !r[g].is_zero() {
                        terms.push((lam(i, j), -r[g].clone()));
                    }
                }
                terms.push((spec(i, g), -Rational::one()));
                lp.add_equality(terms, rhs);

                let mut terms: Vec<(usize, Rational)> = Vec::new();
                let mut rhs = Rational::zero();
                if i == k {
                    rhs = -qv[g].clone();
                } else {
                    terms.push((mid(i, g), Rational::one()));
                }
                for (j, (_, s)) in rels.iter().enumerate() {
                    if !s[g].is_zero() {
                        terms.push((lam(i, j), -s[g].clone()));
                    }
                }
                terms.push((spec(i, g), -Rational::one()));
                lp.add_equality(terms, rhs);
            }
        }
        let x = lp.solve()?;

        let point = |i: usize| -> Distribution {
            if i == 0 {
                p.clone()
            } else if i == k {
                q.clone()
            } else {
                self.vector_to_distribution(&x[mid(i, 0)..mid(i, 0) + n])
            }
        };
        let mut steps = Vec::with_capacity(k);
        for i in 1..=k {
            let from = point(i - 1);
            let to = point(i);
            if from == to {
                continue;
            }
            let weights = (0..m2)
                .filter(|&j| !x[lam(i, j)].is_zero())
                .map(|j| RelationUse {
                    relation: j / 2,
                    reversed: j % 2 == 1,
                    weight: x[lam(i, j)].clone(),
                })
                .collect();
            let spectator = (0..n)
                .filter(|&g| !x[spec(i, g)].is_zero())
                .map(|g| (self.generators[g].clone(), x[spec(i, g)].clone()))
                .collect();
            steps.push(Move { from, to, weights, spectator });
        }
        Some(ZigZag { steps })
    }
}

impl fmt::Debug for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Presentation")
            .field("generators", &self.generators)
            .field("relations", &self.relations)
            .finish()
    }
}

/// An element of a presented convex set, carried by a representative.
///
/// `PartialEq` compares representatives syntactically; use [`eq`] for the
/// quotient equality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PresentedElement {
    presentation: Arc<Presentation>,
    rep: Distribution,
}

impl PresentedElement {
    pub fn new(presentation: Arc<Presentation>, rep: Distribution) -> Result<Self> {
        if !presentation.supports(&rep) {
            return Err(Error::PresentationMismatch);
        }
        Ok(PresentedElement { presentation, rep })
    }

    pub fn presentation(&self) -> &Arc<Presentation> {
        &self.presentation
    }

    pub fn rep(&self) -> &Distribution {
        &self.rep
    }

    pub fn into_rep(self) -> Distribution {
        self.rep
    }
}

pub(crate) fn same_presentation(a: &Arc<Presentation>, b: &Arc<Presentation>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// How one relation pair is used inside a move.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelationUse {
    pub relation: usize,
    /// `true` when the pair is used right-to-left.
    pub reversed: bool,
    #[serde(serialize_with = "ser_rational")]
    pub weight: Rational,
}

/// One convexified relation step `from = Σλ r + t`, `to = Σλ s + t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Move {
    pub from: Distribution,
    pub to: Distribution,
    pub weights: Vec<RelationUse>,
    #[serde(serialize_with = "ser_weight_list")]
    pub spectator: Vec<(String, Rational)>,
}

impl Move {
    /// Exact replay against the presentation.
    pub fn is_valid(&self, pres: &Presentation) -> bool {
        if self.weights.iter().any(|u| u.weight.is_negative() || u.relation >= pres.relations.len())
            || self.spectator.iter().any(|(g, w)| w.is_negative() || !pres.contains_generator(g))
        {
            return false;
        }
        let mut lhs = BTreeMap::<String, Rational>::new();
        let mut rhs = BTreeMap::<String, Rational>::new();
        for u in &self.weights {
            let (r, s) = &pres.relations[u.relation];
            let (r, s) = if u.reversed { (s, r) } else { (r, s) };
            for (x, w) in r.scaled_pairs(&u.weight) {
                *lhs.entry(x).or_insert_with(Rational::zero) += w;
            }
            for (x, w) in s.scaled_pairs(&u.weight) {
                *rhs.entry(x).or_insert_with(Rational::zero) += w;
            }
        }
        for (g, w) in &self.spectator {
            *lhs.entry(g.clone()).or_insert_with(Rational::zero) += w;
            *rhs.entry(g.clone()).or_insert_with(Rational::zero) += w;
        }
        lhs.retain(|_, w| !w.is_zero());
        rhs.retain(|_, w| !w.is_zero());
        lhs == self.from.clone().into_weights() && rhs == self.to.clone().into_weights()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZigZag {
    pub steps: Vec<Move>,
}

impl ZigZag {
    /// Checks every move and that the path runs from `p` to `q`.
    pub fn replays(&self, pres: &Presentation, p: &Distribution, q: &Distribution) -> bool {
        let mut cur = p;
        for step in &self.steps {
            if &step.from != cur || !step.is_valid(pres) {
                return false;
            }
            cur = &step.to;
        }
        cur == q
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn reversed(&self) -> ZigZag {
        ZigZag {
            steps: self
                .steps
                .iter()
                .rev()
                .map(|s| Move {
                    from: s.to.clone(),
                    to: s.from.clone(),
                    weights: s
                        .weights
                        .iter()
                        .map(|u| RelationUse { reversed: !u.reversed, ..u.clone() })
                        .collect(),
                    spectator: s.spectator.clone(),
                })
                .collect(),
        }
    }

    pub fn concat(&self, other: &ZigZag) -> ZigZag {
        ZigZag { steps: self.steps.iter().chain(&other.steps).cloned().collect() }
    }
}

/// A linear functional on generators; omitted generators take value 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AffineInvariant {
    #[serde(serialize_with = "ser_rational_map")]
    pub values: BTreeMap<String, Rational>,
}

impl AffineInvariant {
    pub fn evaluate(&self, p: &Distribution) -> Rational {
        p.iter().fold(Rational::zero(), |acc, (x, w)| match self.values.get(x) {
            Some(v) => acc + v * w,
            None => acc,
        })
    }

    /// Constant on every relation pair and different on `p`, `q`.
    pub fn separates(&self, pres: &Presentation, p: &Distribution, q: &Distribution) -> bool {
        pres.relations.iter().all(|(r, s)| self.evaluate(r) == self.evaluate(s))
            && self.evaluate(p) != self.evaluate(q)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum EqualityStatus {
    Equal,
    Distinct,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EqualityVerdict {
    Equal(ZigZag),
    Distinct(AffineInvariant),
    Unknown { bound: usize },
}

impl EqualityVerdict {
    pub fn status(&self) -> EqualityStatus {
        match self {
            EqualityVerdict::Equal(_) => EqualityStatus::Equal,
            EqualityVerdict::Distinct(_) => EqualityStatus::Distinct,
            EqualityVerdict::Unknown { .. } => EqualityStatus::Unknown,
        }
    }

    pub fn is_equal(&self) -> bool {
        matches!(self, EqualityVerdict::Equal(_))
    }

    pub fn is_distinct(&self) -> bool {
        matches!(self, EqualityVerdict::Distinct(_))
    }

    /// Re-checks the attached witness. Unknown verdicts carry nothing to
    /// check and count as valid.
    pub fn validate(&self, pres: &Presentation, p: &Distribution, q: &Distribution) -> bool {
        match self {
            EqualityVerdict::Equal(path) => path.replays(pres, p, q),
            EqualityVerdict::Distinct(inv) => inv.separates(pres, p, q),
            EqualityVerdict::Unknown { .. } => true,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            EqualityVerdict::Equal(path) => serde_json::json!({ "status": "Equal", "witness": path }),
            EqualityVerdict::Distinct(inv) => serde_json::json!({ "status": "Distinct", "witness": inv }),
            EqualityVerdict::Unknown { bound } => serde_json::json!({ "status": "Unknown", "witness": { "bound": bound } }),
        }
    }
}

/// Three-valued equality of presented elements.
pub fn eq(e1: &PresentedElement, e2: &PresentedElement, bound: usize) -> Result<EqualityVerdict> {
    if !same_presentation(&e1.presentation, &e2.presentation) {
        return Err(Error::PresentationMismatch);
    }
    e1.presentation.decide(&e1.rep, &e2.rep, bound)
}

/// The structure map of the quotient: mixes representatives.
pub fn quotient_mix(alpha: &[Rational], es: &[PresentedElement]) -> Result<PresentedElement> {
    let Some(first) = es.first() else {
        return Err(Error::LengthMismatch { expected: alpha.len(), found: 0 });
    };
    if es.iter().any(|e| !same_presentation(&e.presentation, &first.presentation)) {
        return Err(Error::PresentationMismatch);
    }
    let reps: Vec<Distribution> = es.iter().map(|e| e.rep.clone()).collect();
    let rep = convex_combine(alpha, &reps)?;
    Ok(PresentedElement { presentation: first.presentation.clone(), rep })
}

/// A convex map between presented convex sets, stored by its values on
/// source generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvexMap {
    source: Arc<Presentation>,
    target: Arc<Presentation>,
    images: BTreeMap<String, Distribution>,
}

impl ConvexMap {
    /// Builds a map without checking the source relations. The caller is
    /// responsible for well-definedness.
    pub fn from_images_unchecked(
        source: Arc<Presentation>,
        target: Arc<Presentation>,
        images: BTreeMap<String, Distribution>,
    ) -> Result<Self> {
        for g in source.generators() {
            let Some(img) = images.get(g) else {
                return Err(Error::InvalidInput(format!("no image for generator {g:?}")));
            };
            if !target.supports(img) {
                return Err(Error::PresentationMismatch);
            }
        }
        if images.len() != source.generators().len() {
            return Err(Error::InvalidInput("images mention unknown generators".into()));
        }
        Ok(ConvexMap { source, target, images })
    }

    pub fn identity(pres: &Arc<Presentation>) -> Self {
        let images = pres.generators().iter().map(|g| (g.clone(), Distribution::delta(g.clone()))).collect();
        ConvexMap { source: pres.clone(), target: pres.clone(), images }
    }

    /// Constant map at `value`.
    pub fn constant(source: &Arc<Presentation>, value: &PresentedElement) -> Self {
        let images = source.generators().iter().map(|g| (g.clone(), value.rep.clone())).collect();
        ConvexMap { source: source.clone(), target: value.presentation.clone(), images }
    }

    pub fn source(&self) -> &Arc<Presentation> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Presentation> {
        &self.target
    }

    pub fn image(&self, g: &str) -> Option<&Distribution> {
        self.images.get(g)
    }

    pub fn images(&self) -> &BTreeMap<String, Distribution> {
        &self.images
    }

    /// Affine extension on representatives.
    pub fn apply_rep(&self, p: &Distribution) -> Result<Distribution> {
        if !self.source.supports(p) {
            return Err(Error::PresentationMismatch);
        }
        Ok(p.bind(|g| self.images[g].clone()))
    }

    pub fn evaluate(&self, e: &PresentedElement) -> Result<PresentedElement> {
        if !same_presentation(&e.presentation, &self.source) {
            return Err(Error::PresentationMismatch);
        }
        Ok(PresentedElement { presentation: self.target.clone(), rep: self.apply_rep(&e.rep)? })
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &ConvexMap) -> Result<ConvexMap> {
        if !same_presentation(&first.target, &self.source) {
            return Err(Error::SignatureMismatch);
        }
        let images = first
            .images
            .iter()
            .map(|(g, img)| Ok((g.clone(), self.apply_rep(img)?)))
            .collect::<Result<_>>()?;
        Ok(ConvexMap { source: first.source.clone(), target: self.target.clone(), images })
    }

    /// Checks that every source relation maps to equal elements.
    pub fn check_well_defined(&self, bound: usize) -> Result<()> {
        for (index, (r, s)) in self.source.relations().iter().enumerate() {
            let (fr, fs) = (self.apply_rep(r)?, self.apply_rep(s)?);
            match self.target.decide(&fr, &fs, bound)? {
                EqualityVerdict::Equal(_) => {}
                EqualityVerdict::Distinct(_) => {
                    return Err(Error::RelationViolated { index, lhs: fr.to_string(), rhs: fs.to_string() })
                }
                EqualityVerdict::Unknown { .. } => return Err(Error::Undecided { index, bound }),
            }
        }
        Ok(())
    }

    /// Pointwise comparison on generators: `Ok(true)` when all images are
    /// equal, `Ok(false)` when one is provably distinct, and an error when
    /// the engine cannot decide.
    pub fn agrees_with(&self, other: &ConvexMap, bound: usize) -> Result<bool> {
        if !same_presentation(&self.source, &other.source) || !same_presentation(&self.target, &other.target) {
            return Err(Error::SignatureMismatch);
        }
        let mut undecided = None;
        for (index, g) in self.source.generators().iter().enumerate() {
            match self.target.decide(&self.images[g], &other.images[g], bound)?.status() {
                EqualityStatus::Equal => {}
                EqualityStatus::Distinct => return Ok(false),
                EqualityStatus::Unknown => undecided = Some(index),
            }
        }
        match undecided {
            Some(index) => Err(Error::Undecided { index, bound }),
            None => Ok(true),
        }
    }
}

/// Extends `assignment` affinely from `src` to `tgt`, provided every
/// relation of `src` is respected.
pub fn induce_map(
    src: &Arc<Presentation>,
    tgt: &Arc<Presentation>,
    assignment: &BTreeMap<String, PresentedElement>,
    bound: usize,
) -> Result<ConvexMap> {
    let mut images = BTreeMap::new();
    for (g, e) in assignment {
        if !same_presentation(&e.presentation, tgt) {
            return Err(Error::PresentationMismatch);
        }
        images.insert(g.clone(), e.rep.clone());
    }
    let map = ConvexMap::from_images_unchecked(src.clone(), tgt.clone(), images)?;
    map.check_well_defined(bound)?;
    Ok(map)
}

/// Pointwise convex combination of maps with a shared signature.
pub fn hom_combine(alpha: &[Rational], fs: &[ConvexMap]) -> Result<ConvexMap> {
    let Some(first) = fs.first() else {
        return Err(Error::LengthMismatch { expected: alpha.len(), found: 0 });
    };
    if fs
        .iter()
        .any(|f| !same_presentation(&f.source, &first.source) || !same_presentation(&f.target, &first.target))
    {
        return Err(Error::SignatureMismatch);
    }
    let mut images = BTreeMap::new();
    for g in first.source.generators() {
        let imgs: Vec<Distribution> = fs.iter().map(|f| f.images[g].clone()).collect();
        images.insert(g.clone(), convex_combine(alpha, &imgs)?);
    }
    Ok(ConvexMap { source: first.source.clone(), target: first.target.clone(), images })
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

fn ser_rational_map<S: serde::Serializer>(
    m: &BTreeMap<String, Rational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(m.len()))?;
    for (k, v) in m {
        map.serialize_entry(k, &format_rational(v))?;
    }
    map.end()
}

fn ser_weight_list<S: serde::Serializer>(
    v: &[(String, Rational)],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for (g, w) in v {
        seq.serialize_element(&serde_json::json!({ "el": g, "w": format_rational(w) }))?;
    }
    seq.end()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{delta, dist};
    use crate::semiring::{q, qi};

    fn one_relation(gens: &[&str], r: Distribution, s: Distribution) -> Arc<Presentation> {
        Arc::new(Presentation::new(gens.iter().map(|g| g.to_string()).collect(), vec![(r, s)]).unwrap())
    }

    #[test]
    fn identical_reps_are_equal_with_empty_path() {
        let pres = Arc::new(Presentation::free(["a", "b"]).unwrap());
        let a = pres.generator("a").unwrap();
        let v = eq(&a, &a, 0).unwrap();
        assert_eq!(v, EqualityVerdict::Equal(ZigZag { steps: vec![] }));
    }

    #[test]
    fn free_deltas_are_distinct() {
        let pres = Arc::new(Presentation::free(["a", "b"]).unwrap());
        let (a, b) = (pres.generator("a").unwrap(), pres.generator("b").unwrap());
        let v = eq(&a, &b, 0).unwrap();
        let EqualityVerdict::Distinct(inv) = &v else { panic!("expected Distinct, got {v:?}") };
        assert!(inv.separates(&pres, a.rep(), b.rep()));
    }

    #[test]
    fn partial_rewrite_is_one_step() {
        let pres = one_relation(&["a", "b", "c", "d"], delta("a"), dist(&[("b", q(1, 2)), ("c", q(1, 2))]));
        let lhs = pres.element(dist(&[("a", q(1, 2)), ("d", q(1, 2))])).unwrap();
        let rhs = pres.element(dist(&[("b", q(1, 4)), ("c", q(1, 4)), ("d", q(1, 2))])).unwrap();
        let v = eq(&lhs, &rhs, 1).unwrap();
        let EqualityVerdict::Equal(path) = &v else { panic!("expected Equal, got {v:?}") };
        assert_eq!(path.len(), 1);
        assert_eq!(path.steps[0].weights[0].weight, q(1, 2));
        assert_eq!(path.steps[0].spectator, vec![("d".to_string(), q(1, 2))]);
        assert!(v.validate(&pres, lhs.rep(), rhs.rep()));
        assert!(path.reversed().replays(&pres, rhs.rep(), lhs.rep()));
    }

    #[test]
    fn mixing_related_points() {
        let pres = one_relation(&["a", "b"], delta("a"), delta("b"));
        let (a, b) = (pres.generator("a").unwrap(), pres.generator("b").unwrap());
        let mid = quotient_mix(&[q(1, 2), q(1, 2)], &[a.clone(), b]).unwrap();
        let v = eq(&mid, &a, 1).unwrap();
        assert!(v.is_equal());
        assert!(v.validate(&pres, mid.rep(), a.rep()));
    }

    #[test]
    fn non_cancellative_pair_is_unknown() {
        // a ~ (a + b) / 2 does not force a = b in a general convex set, and
        // no affine functional separates them.
        let pres = one_relation(&["a", "b"], delta("a"), dist(&[("a", q(1, 2)), ("b", q(1, 2))]));
        let v = pres.decide(&delta("a"), &delta("b"), 3).unwrap();
        assert_eq!(v.status(), EqualityStatus::Unknown);
    }

    #[test]
    fn two_step_path_is_found() {
        // a ~ b and b ~ c chain.
        let pres = Arc::new(
            Presentation::new(
                vec!["a".into(), "b".into(), "c".into()],
                vec![(delta("a"), delta("b")), (delta("c"), delta("b"))],
            )
            .unwrap(),
        );
        let v = pres.decide(&delta("a"), &delta("c"), 4).unwrap();
        let EqualityVerdict::Equal(path) = &v else { panic!("{v:?}") };
        assert!(path.replays(&pres, &delta("a"), &delta("c")));
        assert!(path.len() <= 2);
    }

    #[test]
    fn induce_map_examples() {
        let free = Arc::new(Presentation::free(["a", "b"]).unwrap());
        let id = induce_map(
            &free,
            &free,
            &[("a", free.generator("a").unwrap()), ("b", free.generator("b").unwrap())]
                .into_iter()
                .map(|(g, e)| (g.to_string(), e))
                .collect(),
            DEFAULT_STEP_BOUND,
        )
        .unwrap();
        assert_eq!(id, ConvexMap::identity(&free));

        let src = one_relation(&["a", "b"], delta("a"), delta("b"));
        let point = Arc::new(Presentation::free(["z"]).unwrap());
        let z = point.generator("z").unwrap();
        let collapse: BTreeMap<_, _> = [("a".to_string(), z.clone()), ("b".to_string(), z)].into_iter().collect();
        assert!(induce_map(&src, &point, &collapse, 4).is_ok());

        let tgt = Arc::new(Presentation::free(["x", "y"]).unwrap());
        let bad: BTreeMap<_, _> = [
            ("a".to_string(), tgt.generator("x").unwrap()),
            ("b".to_string(), tgt.generator("y").unwrap()),
        ]
        .into_iter()
        .collect();
        assert!(matches!(induce_map(&src, &tgt, &bad, 4), Err(Error::RelationViolated { index: 0, .. })));
    }

    #[test]
    fn hom_combine_of_identity_and_swap() {
        let x = Arc::new(Presentation::free(["0", "1"]).unwrap());
        let id = ConvexMap::identity(&x);
        let swap = ConvexMap::from_images_unchecked(
            x.clone(),
            x.clone(),
            [("0".to_string(), delta("1")), ("1".to_string(), delta("0"))].into_iter().collect(),
        )
        .unwrap();
        let mix = hom_combine(&[q(1, 2), q(1, 2)], &[id.clone(), swap]).unwrap();
        let out = mix.evaluate(&x.generator("0").unwrap()).unwrap();
        assert_eq!(out.rep(), &dist(&[("0", q(1, 2)), ("1", q(1, 2))]));
        assert_eq!(hom_combine(&[qi(1)], std::slice::from_ref(&id)).unwrap(), id);
    }

    #[test]
    fn presentation_json_round_trip_and_validation() {
        let pres = Presentation::new(vec!["a".into(), "b".into()], vec![(delta("a"), delta("b"))]).unwrap();
        let text = serde_json::to_string(&pres).unwrap();
        assert_eq!(
            text,
            r#"{"generators":["a","b"],"relations":[[{"weights":[{"el":"a","w":"1"}]},{"weights":[{"el":"b","w":"1"}]}]]}"#
        );
        let back: Presentation = serde_json::from_str(&text).unwrap();
        assert_eq!(back, pres);
        assert!(serde_json::from_str::<Presentation>(r#"{"generators":["a"],"relations":[[{"weights":[{"el":"a","w":"1"}]},{"weights":[{"el":"q","w":"1"}]}]]}"#).is_err());
        assert!(serde_json::from_str::<Presentation>(r#"{"generators":["a","a"]}"#).is_err());
    }
}
