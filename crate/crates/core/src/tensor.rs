//! The convex tensor product, n-convex maps and the symmetric monoidal
//! coherences.
//!
//! The tensor of presentations `X_1, …, X_n` is presented on tuples of
//! factor generators, with every factor relation lifted along each choice
//! of generators in the other slots. Pure tensors are expanded into this
//! normal position by [`TensorPresentation::universal_map`].
//!
//! Tuple generators are named by the JSON encoding of the tuple, so names
//! stay unambiguous however the factor generators are spelled.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::distribution::{convex_combine, Distribution};
use crate::error::{Error, Result};
use crate::presented::{
    hom_combine, same_presentation, ConvexMap, EqualityStatus, Presentation, PresentedElement,
};
use crate::semiring::{q, Rational};

/// Name of the tuple generator `(g_1, …, g_n)`.
pub fn tuple_name<S: AsRef<str>>(parts: &[S]) -> String {
    let parts: Vec<&str> = parts.iter().map(AsRef::as_ref).collect();
    serde_json::to_string(&parts).expect("string list serializes")
}

/// Inverse of [`tuple_name`].
pub fn parse_tuple_name(name: &str) -> Option<Vec<String>> {
    serde_json::from_str(name).ok()
}

/// Cartesian product of generator lists, in lexicographic slot order.
pub(crate) fn product<T: Clone>(lists: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![Vec::new()];
    for list in lists {
        let mut next = Vec::with_capacity(out.len() * list.len());
        for prefix in &out {
            for x in list {
                let mut t = prefix.clone();
                t.push(x.clone());
                next.push(t);
            }
        }
        out = next;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorPresentation {
    factors: Vec<Arc<Presentation>>,
    presentation: Arc<Presentation>,
    tuples: BTreeMap<String, Vec<String>>,
}

/// Builds the tensor presentation of `factors`.
pub fn tensor(factors: &[Arc<Presentation>]) -> Result<TensorPresentation> {
    if factors.is_empty() {
        return Err(Error::EmptyFactorList);
    }
    let lists: Vec<Vec<String>> = factors.iter().map(|f| f.generators().to_vec()).collect();
    let all = product(&lists);
    let generators: Vec<String> = all.iter().map(|t| tuple_name(t)).collect();
    let tuples = generators.iter().cloned().zip(all).collect();

    let mut relations = Vec::new();
    for (i, f) in factors.iter().enumerate() {
        let others: Vec<Vec<String>> =
            lists.iter().enumerate().map(|(j, l)| if j == i { vec![String::new()] } else { l.clone() }).collect();
        for (r, s) in f.relations() {
            for ctx in product(&others) {
                let lift = |d: &Distribution| {
                    d.map(|g| {
                        let mut t = ctx.clone();
                        t[i] = g.clone();
                        tuple_name(&t)
                    })
                };
                relations.push((lift(r), lift(s)));
            }
        }
    }
    let presentation = Arc::new(Presentation::new(generators, relations)?);
    Ok(TensorPresentation { factors: factors.to_vec(), presentation, tuples })
}

impl TensorPresentation {
    pub fn factors(&self) -> &[Arc<Presentation>] {
        &self.factors
    }

    pub fn presentation(&self) -> &Arc<Presentation> {
        &self.presentation
    }

    pub fn tuple_of(&self, name: &str) -> Option<&[String]> {
        self.tuples.get(name).map(Vec::as_slice)
    }

    pub fn tuples(&self) -> impl Iterator<Item = &Vec<String>> {
        self.presentation.generators().iter().map(|g| &self.tuples[g])
    }

    /// The pure tensor `x_1 ⊗ … ⊗ x_n` in expanded form: the weight of a
    /// tuple is the product of the slot weights.
    pub fn universal_map(&self, xs: &[PresentedElement]) -> Result<PresentedElement> {
        if xs.len() != self.factors.len() {
            return Err(Error::ArityMismatch { expected: self.factors.len(), found: xs.len() });
        }
        for (i, (x, f)) in xs.iter().zip(&self.factors).enumerate() {
            if !same_presentation(x.presentation(), f) {
                return Err(Error::FactorMismatch(i));
            }
        }
        let reps: Vec<&Distribution> = xs.iter().map(|x| x.rep()).collect();
        self.presentation.element(expand(&reps))
    }

    pub fn pure_generator<S: AsRef<str>>(&self, tuple: &[S]) -> Result<PresentedElement> {
        self.presentation.generator(&tuple_name(tuple))
    }
}

/// Product expansion of distributions into tuple-named distributions.
pub(crate) fn expand(reps: &[&Distribution]) -> Distribution {
    let mut acc: Vec<(Vec<String>, Rational)> = vec![(Vec::new(), Rational::one())];
    for rep in reps {
        let mut next = Vec::with_capacity(acc.len() * rep.support_size());
        for (prefix, w) in &acc {
            for (g, v) in rep.iter() {
                let mut t = prefix.clone();
                t.push(g.clone());
                next.push((t, w * v));
            }
        }
        acc = next;
    }
    Distribution::new(acc.into_iter().map(|(t, w)| (tuple_name(&t), w))).expect("product of distributions")
}

/// A multiconvex map given by its values on generator tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NConvexMapSpec {
    pub factors: Vec<Arc<Presentation>>,
    pub target: Arc<Presentation>,
    pub table: BTreeMap<Vec<String>, Distribution>,
}

#[derive(Serialize, Deserialize)]
struct TableEntry {
    tuple: Vec<String>,
    value: Distribution,
}

#[derive(Serialize, Deserialize)]
struct SpecJson {
    factors: Vec<Presentation>,
    target: Presentation,
    table: Vec<TableEntry>,
}

impl NConvexMapSpec {
    pub fn new(
        factors: Vec<Arc<Presentation>>,
        target: Arc<Presentation>,
        table: BTreeMap<Vec<String>, Distribution>,
    ) -> Result<Self> {
        let spec = NConvexMapSpec { factors, target, table };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let lists: Vec<Vec<String>> = self.factors.iter().map(|f| f.generators().to_vec()).collect();
        let all = product(&lists);
        if all.len() != self.table.len() {
            return Err(Error::InvalidInput(format!(
                "table has {} entries, expected {}",
                self.table.len(),
                all.len()
            )));
        }
        for t in all {
            let Some(v) = self.table.get(&t) else {
                return Err(Error::InvalidInput(format!("table misses tuple {t:?}")));
            };
            if !self.target.supports(v) {
                return Err(Error::PresentationMismatch);
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: SpecJson = serde_json::from_str(text)?;
        Self::new(
            raw.factors.into_iter().map(Arc::new).collect(),
            Arc::new(raw.target),
            raw.table.into_iter().map(|e| (e.tuple, e.value)).collect(),
        )
    }

    pub fn to_json(&self) -> serde_json::Value {
        let raw = SpecJson {
            factors: self.factors.iter().map(|f| (**f).clone()).collect(),
            target: (*self.target).clone(),
            table: self.table.iter().map(|(t, v)| TableEntry { tuple: t.clone(), value: v.clone() }).collect(),
        };
        serde_json::to_value(raw).expect("spec serializes")
    }

    /// Evaluates the multi-affine extension on a tuple of representatives.
    pub fn evaluate(&self, xs: &[PresentedElement]) -> Result<PresentedElement> {
        let t = tensor(&self.factors)?;
        let pure = t.universal_map(xs)?;
        self.unchecked_map()?.evaluate(&pure)
    }

    fn unchecked_map(&self) -> Result<ConvexMap> {
        let t = tensor(&self.factors)?;
        let images = self.table.iter().map(|(k, v)| (tuple_name(k), v.clone())).collect();
        ConvexMap::from_images_unchecked(t.presentation.clone(), self.target.clone(), images)
    }
}

/// The convex map out of the tensor induced by a multiconvex table.
pub fn extend_multiconvex(spec: &NConvexMapSpec, bound: usize) -> Result<ConvexMap> {
    spec.validate()?;
    let map = spec.unchecked_map()?;
    map.check_well_defined(bound)?;
    Ok(map)
}

/// Restriction of a map out of the tensor along the universal map.
pub fn restrict_to_table(t: &TensorPresentation, map: &ConvexMap) -> Result<NConvexMapSpec> {
    if !same_presentation(map.source(), &t.presentation) {
        return Err(Error::SignatureMismatch);
    }
    let mut table = BTreeMap::new();
    for tuple in t.tuples() {
        let pure = t.universal_map(
            &tuple
                .iter()
                .zip(&t.factors)
                .map(|(g, f)| f.generator(g))
                .collect::<Result<Vec<_>>>()?,
        )?;
        table.insert(tuple.clone(), map.evaluate(&pure)?.into_rep());
    }
    NConvexMapSpec::new(t.factors.clone(), map.target().clone(), table)
}

/// Tensor product of convex maps: `(x_1, …, x_n) ↦ f_1(x_1) ⊗ … ⊗ f_n(x_n)`.
pub fn tensor_maps(maps: &[ConvexMap]) -> Result<ConvexMap> {
    let src = tensor(&maps.iter().map(|f| f.source().clone()).collect::<Vec<_>>())?;
    let tgt = tensor(&maps.iter().map(|f| f.target().clone()).collect::<Vec<_>>())?;
    let mut images = BTreeMap::new();
    for tuple in src.tuples() {
        let parts: Vec<&Distribution> = tuple
            .iter()
            .zip(maps)
            .map(|(g, f)| f.image(g).expect("total map"))
            .collect();
        images.insert(tuple_name(tuple), expand(&parts));
    }
    ConvexMap::from_images_unchecked(src.presentation.clone(), tgt.presentation.clone(), images)
}

/// The monoidal unit: a one-point convex set.
pub fn unit_presentation() -> Arc<Presentation> {
    Arc::new(Presentation::free(["•"]).expect("one generator"))
}

/// A bracketing of factors and units.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bracket {
    Unit,
    Leaf(usize),
    Pair(Box<Bracket>, Box<Bracket>),
}

impl Bracket {
    pub fn pair(a: Bracket, b: Bracket) -> Bracket {
        Bracket::Pair(Box::new(a), Box::new(b))
    }

    /// Evaluates to a presentation plus, per generator, the factor
    /// generator read off each leaf.
    fn evaluate(&self, factors: &[Arc<Presentation>]) -> Result<(Arc<Presentation>, Vec<(String, BTreeMap<usize, String>)>)> {
        match self {
            Bracket::Unit => {
                let u = unit_presentation();
                Ok((u, vec![("•".to_string(), BTreeMap::new())]))
            }
            Bracket::Leaf(i) => {
                let f = factors.get(*i).ok_or(Error::ArityMismatch { expected: i + 1, found: factors.len() })?;
                let gens = f.generators().iter().map(|g| (g.clone(), [(*i, g.clone())].into_iter().collect())).collect();
                Ok((f.clone(), gens))
            }
            Bracket::Pair(a, b) => {
                let (pa, ga) = a.evaluate(factors)?;
                let (pb, gb) = b.evaluate(factors)?;
                let t = tensor(&[pa, pb])?;
                let mut gens = Vec::with_capacity(ga.len() * gb.len());
                for (na, la) in &ga {
                    for (nb, lb) in &gb {
                        let mut leaves = la.clone();
                        leaves.extend(lb.iter().map(|(k, v)| (*k, v.clone())));
                        gens.push((tuple_name(&[na, nb]), leaves));
                    }
                }
                Ok((t.presentation, gens))
            }
        }
    }

    fn leaves(&self, out: &mut Vec<usize>) {
        match self {
            Bracket::Unit => {}
            Bracket::Leaf(i) => out.push(*i),
            Bracket::Pair(a, b) => {
                a.leaves(out);
                b.leaves(out);
            }
        }
    }
}

/// The map between two bracketings induced by the cartesian coherence on
/// generator tuples.
pub fn structural_map(src: &Bracket, tgt: &Bracket, factors: &[Arc<Presentation>]) -> Result<ConvexMap> {
    let (mut ls, mut lt) = (Vec::new(), Vec::new());
    src.leaves(&mut ls);
    tgt.leaves(&mut lt);
    ls.sort_unstable();
    lt.sort_unstable();
    if ls != lt || ls.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::CoherenceFailure(format!("bracketings {src:?} and {tgt:?} have different leaves")));
    }
    let (ps, gs) = src.evaluate(factors)?;
    let (pt, gt) = tgt.evaluate(factors)?;
    let lookup: BTreeMap<&BTreeMap<usize, String>, &String> = gt.iter().map(|(n, l)| (l, n)).collect();
    let mut images = BTreeMap::new();
    for (name, leaves) in &gs {
        let img = lookup
            .get(leaves)
            .ok_or_else(|| Error::CoherenceFailure(format!("no target generator for {name}")))?;
        images.insert(name.clone(), Distribution::delta((*img).clone()));
    }
    ConvexMap::from_images_unchecked(ps, pt, images)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum CoherenceKind {
    Associator,
    LeftUnitor,
    RightUnitor,
    Braiding,
}

impl CoherenceKind {
    pub fn arity(self) -> usize {
        match self {
            CoherenceKind::Associator => 3,
            CoherenceKind::LeftUnitor | CoherenceKind::RightUnitor => 1,
            CoherenceKind::Braiding => 2,
        }
    }

    fn brackets(self) -> (Bracket, Bracket) {
        use Bracket::*;
        match self {
            CoherenceKind::Associator => (
                Bracket::pair(Bracket::pair(Leaf(0), Leaf(1)), Leaf(2)),
                Bracket::pair(Leaf(0), Bracket::pair(Leaf(1), Leaf(2))),
            ),
            CoherenceKind::LeftUnitor => (Bracket::pair(Unit, Leaf(0)), Leaf(0)),
            CoherenceKind::RightUnitor => (Bracket::pair(Leaf(0), Unit), Leaf(0)),
            CoherenceKind::Braiding => (Bracket::pair(Leaf(0), Leaf(1)), Bracket::pair(Leaf(1), Leaf(0))),
        }
    }
}

/// A coherence isomorphism together with its inverse.
pub fn coherence(kind: CoherenceKind, factors: &[Arc<Presentation>]) -> Result<(ConvexMap, ConvexMap)> {
    if factors.len() != kind.arity() {
        return Err(Error::ArityMismatch { expected: kind.arity(), found: factors.len() });
    }
    let (a, b) = kind.brackets();
    Ok((structural_map(&a, &b, factors)?, structural_map(&b, &a, factors)?))
}

fn coh(kind: CoherenceKind, factors: &[&Arc<Presentation>]) -> Result<ConvexMap> {
    let owned: Vec<Arc<Presentation>> = factors.iter().map(|f| (*f).clone()).collect();
    Ok(coherence(kind, &owned)?.0)
}

fn coh_inv(kind: CoherenceKind, factors: &[&Arc<Presentation>]) -> Result<ConvexMap> {
    let owned: Vec<Arc<Presentation>> = factors.iter().map(|f| (*f).clone()).collect();
    Ok(coherence(kind, &owned)?.1)
}

fn t2(a: &Arc<Presentation>, b: &Arc<Presentation>) -> Result<Arc<Presentation>> {
    Ok(tensor(&[a.clone(), b.clone()])?.presentation)
}

/// Composes maps left to right: `chain(&[f, g, h]) = h ∘ g ∘ f`.
fn chain(maps: &[ConvexMap]) -> Result<ConvexMap> {
    let mut acc = maps[0].clone();
    for m in &maps[1..] {
        acc = m.after(&acc)?;
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiagramCheck {
    pub name: &'static str,
    pub commutes: bool,
}

/// Checks that a map and its claimed inverse compose to identities.
pub fn is_isomorphism(f: &ConvexMap, g: &ConvexMap, bound: usize) -> Result<bool> {
    Ok(g.after(f)?.agrees_with(&ConvexMap::identity(f.source()), bound)?
        && f.after(g)?.agrees_with(&ConvexMap::identity(f.target()), bound)?)
}

/// The seven symmetric monoidal coherence diagrams on the given factors.
pub fn check_coherence_diagrams(
    a: &Arc<Presentation>,
    b: &Arc<Presentation>,
    c: &Arc<Presentation>,
    d: &Arc<Presentation>,
    bound: usize,
) -> Result<Vec<DiagramCheck>> {
    use CoherenceKind::*;
    let id = ConvexMap::identity;
    let unit = unit_presentation();
    let mut out = Vec::new();

    // Pentagon.
    let ab = t2(a, b)?;
    let bc = t2(b, c)?;
    let cd = t2(c, d)?;
    let left = chain(&[
        tensor_maps(&[coh(Associator, &[a, b, c])?, id(d)])?,
        coh(Associator, &[a, &bc, d])?,
        tensor_maps(&[id(a), coh(Associator, &[b, c, d])?])?,
    ])?;
    let right = chain(&[coh(Associator, &[&ab, c, d])?, coh(Associator, &[a, b, &cd])?])?;
    out.push(DiagramCheck { name: "pentagon", commutes: left.agrees_with(&right, bound)? });

    // Triangle.
    let left = chain(&[coh(Associator, &[a, &unit, b])?, tensor_maps(&[id(a), coh(LeftUnitor, &[b])?])?])?;
    let right = tensor_maps(&[coh(RightUnitor, &[a])?, id(b)])?;
    out.push(DiagramCheck { name: "triangle", commutes: left.agrees_with(&right, bound)? });

    // First hexagon.
    let left = chain(&[
        coh(Associator, &[a, b, c])?,
        coh(Braiding, &[a, &bc])?,
        coh(Associator, &[b, c, a])?,
    ])?;
    let right = chain(&[
        tensor_maps(&[coh(Braiding, &[a, b])?, id(c)])?,
        coh(Associator, &[b, a, c])?,
        tensor_maps(&[id(b), coh(Braiding, &[a, c])?])?,
    ])?;
    out.push(DiagramCheck { name: "hexagon", commutes: left.agrees_with(&right, bound)? });

    // Second hexagon, with inverse associators.
    let left = chain(&[
        coh_inv(Associator, &[a, b, c])?,
        coh(Braiding, &[&ab, c])?,
        coh_inv(Associator, &[c, a, b])?,
    ])?;
    let right = chain(&[
        tensor_maps(&[id(a), coh(Braiding, &[b, c])?])?,
        coh_inv(Associator, &[a, c, b])?,
        tensor_maps(&[coh(Braiding, &[a, c])?, id(b)])?,
    ])?;
    out.push(DiagramCheck { name: "inverse hexagon", commutes: left.agrees_with(&right, bound)? });

    // Braiding is an involution.
    let twice = chain(&[coh(Braiding, &[a, b])?, coh(Braiding, &[b, a])?])?;
    out.push(DiagramCheck { name: "braiding involution", commutes: twice.agrees_with(&id(&ab), bound)? });

    // Left unitor after braiding is the right unitor.
    let left = chain(&[coh(Braiding, &[a, &unit])?, coh(LeftUnitor, &[a])?])?;
    out.push(DiagramCheck { name: "unitor braiding", commutes: left.agrees_with(&coh(RightUnitor, &[a])?, bound)? });

    // Unitors agree on the unit.
    let l = coh(LeftUnitor, &[&unit])?;
    let r = coh(RightUnitor, &[&unit])?;
    out.push(DiagramCheck { name: "unit unitors", commutes: l.agrees_with(&r, bound)? });

    Ok(out)
}

/// The isomorphism `D(X) ⊗ D(Y) ≅ D(X × Y)` for free factors. Product
/// generators are labelled `(x, y)`.
pub struct FreeTensorIso {
    pub tensor: TensorPresentation,
    pub product: Arc<Presentation>,
    pub forward: ConvexMap,
    pub inverse: ConvexMap,
}

pub fn free_tensor_iso(xs: &[String], ys: &[String]) -> Result<FreeTensorIso> {
    let x = Arc::new(Presentation::free(xs.iter().cloned())?);
    let y = Arc::new(Presentation::free(ys.iter().cloned())?);
    let t = tensor(&[x, y])?;
    let label = |a: &str, b: &str| format!("({a}, {b})");
    let mut labels = Vec::new();
    let mut forward = BTreeMap::new();
    let mut inverse = BTreeMap::new();
    for tuple in t.tuples() {
        let l = label(&tuple[0], &tuple[1]);
        forward.insert(tuple_name(tuple), Distribution::delta(l.clone()));
        inverse.insert(l.clone(), Distribution::delta(tuple_name(tuple)));
        labels.push(l);
    }
    let product = Arc::new(Presentation::free(labels)?);
    let fwd = ConvexMap::from_images_unchecked(t.presentation.clone(), product.clone(), forward)?;
    let inv = ConvexMap::from_images_unchecked(product.clone(), t.presentation.clone(), inverse)?;
    Ok(FreeTensorIso { tensor: t, product, forward: fwd, inverse: inv })
}

/// A presentation of the convex hull of finitely many maps between free
/// presentations. Generators are the given names; relations come from a
/// basis of the affine dependencies among the maps.
pub fn hom_subpresentation(names: &[String], maps: &[ConvexMap]) -> Result<Presentation> {
    if names.len() != maps.len() || maps.is_empty() {
        return Err(Error::LengthMismatch { expected: names.len(), found: maps.len() });
    }
    let (src, tgt) = (maps[0].source(), maps[0].target());
    if maps.iter().any(|m| !same_presentation(m.source(), src) || !same_presentation(m.target(), tgt)) {
        return Err(Error::SignatureMismatch);
    }
    if !tgt.is_free() {
        return Err(Error::InvalidInput("hom hulls are computed for free targets only".into()));
    }
    // Coordinates of each map: its images on source generators, plus a
    // constant 1 so that dependencies are affine.
    let coords: Vec<Vec<Rational>> = maps
        .iter()
        .map(|m| {
            let mut v = vec![Rational::one()];
            for g in src.generators() {
                v.extend(tgt.to_vector(m.image(g).expect("total")));
            }
            v
        })
        .collect();
    let dim = coords[0].len();
    let k = maps.len();
    // Kernel of the k-column matrix with columns `coords`.
    let rows: Vec<Vec<Rational>> = (0..dim).map(|r| coords.iter().map(|c| c[r].clone()).collect()).collect();
    let kernel = kernel_basis(&rows, k);
    let mut relations = Vec::new();
    for v in kernel {
        let pos: Vec<(String, Rational)> =
            names.iter().zip(&v).filter(|(_, x)| x.is_positive()).map(|(n, x)| (n.clone(), x.clone())).collect();
        let neg: Vec<(String, Rational)> =
            names.iter().zip(&v).filter(|(_, x)| x.is_negative()).map(|(n, x)| (n.clone(), -x.clone())).collect();
        let total = pos.iter().fold(Rational::zero(), |acc, (_, x)| acc + x);
        let norm = |side: Vec<(String, Rational)>| {
            Distribution::new(side.into_iter().map(|(n, x)| (n, x / &total))).expect("affine dependency")
        };
        relations.push((norm(pos), norm(neg)));
    }
    Presentation::new(names.to_vec(), relations)
}

fn kernel_basis(rows: &[Vec<Rational>], cols: usize) -> Vec<Vec<Rational>> {
    let mut m = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let pv = m[r][c].clone();
        for x in m[r].iter_mut() {
            *x = &*x / &pv;
        }
        let pr = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pr) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![Rational::zero(); cols];
            v[fc] = Rational::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[i][fc].clone();
            }
            v
        })
        .collect()
}

/// Outcome of the composition counterexample.
#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleReport {
    /// `(½f0 + ½f1) ∘ (½g0 + ½g1)` at `δ0`.
    pub biconvex_value: Distribution,
    /// `½(f0∘g0) + ½(f1∘g1)` at `δ0`, evaluated from the definitions.
    pub convex_hypothesis_value: Distribution,
    /// The value `½δ1 + ½δ3` sometimes quoted for the convex hypothesis.
    pub quoted_hypothesis_value: Distribution,
    pub unequal: bool,
    pub quoted_value_matches_definitions: bool,
    /// Composition on the finite hom hulls passes as a map out of the tensor.
    pub composition_is_biconvex: bool,
    /// The same biconvex value computed through the tensor product.
    pub tensor_route_agrees: bool,
}

struct CounterexampleMaps {
    x: Arc<Presentation>,
    y: Arc<Presentation>,
    g: [ConvexMap; 2],
    f: [ConvexMap; 2],
}

fn counterexample_maps() -> Result<CounterexampleMaps> {
    let x = Arc::new(Presentation::free(["0", "1"])?);
    let y = Arc::new(Presentation::free(["0", "1", "2", "3"])?);
    let fun = |src: &Arc<Presentation>, tgt: &Arc<Presentation>, pairs: &[(&str, &str)]| {
        ConvexMap::from_images_unchecked(
            src.clone(),
            tgt.clone(),
            pairs.iter().map(|(a, b)| (a.to_string(), Distribution::delta(b.to_string()))).collect(),
        )
    };
    let g0 = ConvexMap::identity(&x);
    let g1 = fun(&x, &x, &[("0", "1"), ("1", "0")])?;
    let f0 = fun(&x, &y, &[("0", "0"), ("1", "1")])?;
    let f1 = fun(&x, &y, &[("0", "2"), ("1", "3")])?;
    Ok(CounterexampleMaps { x, y, g: [g0, g1], f: [f0, f1] })
}

/// Composition of maps between convex sets is biconvex but not convex.
pub fn check_biconvex_not_convex_counterexample(bound: usize) -> Result<CounterexampleReport> {
    let CounterexampleMaps { x, y, g, f } = counterexample_maps()?;
    let half = [q(1, 2), q(1, 2)];
    let d0 = x.generator("0")?;

    let g_mix = hom_combine(&half, &g)?;
    let f_mix = hom_combine(&half, &f)?;
    let biconvex_value = f_mix.after(&g_mix)?.evaluate(&d0)?.into_rep();

    let comps = [f[0].after(&g[0])?, f[1].after(&g[1])?];
    let convex_hypothesis_value = hom_combine(&half, &comps)?.evaluate(&d0)?.into_rep();
    let quoted = Distribution::new([("1".to_string(), q(1, 2)), ("3".to_string(), q(1, 2))])?;

    let unequal = y.decide(&biconvex_value, &convex_hypothesis_value, bound)?.is_distinct();

    // Composition as a map Hom(X,Y) ⊗ Hom(X,X) → Hom(X,Y) on finite hulls.
    let gx = Arc::new(hom_subpresentation(&["g0".into(), "g1".into()], &g)?);
    let composites = [
        f[0].after(&g[0])?,
        f[0].after(&g[1])?,
        f[1].after(&g[0])?,
        f[1].after(&g[1])?,
    ];
    let names: Vec<String> = ["f0", "f0s", "f1", "f1s"].iter().map(|s| s.to_string()).collect();
    let fy = Arc::new(hom_subpresentation(&names, &composites)?);
    let fx = Arc::new(Presentation::free(["f0", "f1"])?);
    let table: BTreeMap<Vec<String>, Distribution> = [
        (["f0", "g0"], "f0"),
        (["f0", "g1"], "f0s"),
        (["f1", "g0"], "f1"),
        (["f1", "g1"], "f1s"),
    ]
    .into_iter()
    .map(|(k, v)| (k.iter().map(|s| s.to_string()).collect(), Distribution::delta(v.to_string())))
    .collect();
    let spec = NConvexMapSpec::new(vec![fx.clone(), gx.clone()], fy.clone(), table)?;
    let (composition_is_biconvex, tensor_route_agrees) = match extend_multiconvex(&spec, bound) {
        Ok(comp) => {
            let t = tensor(&[fx.clone(), gx.clone()])?;
            let fm = fx.element(convex_combine(
                &half,
                &[Distribution::delta("f0".to_string()), Distribution::delta("f1".to_string())],
            )?)?;
            let gm = gx.element(convex_combine(
                &half,
                &[Distribution::delta("g0".to_string()), Distribution::delta("g1".to_string())],
            )?)?;
            let hom_element = comp.evaluate(&t.universal_map(&[fm, gm])?)?;
            // Realize the hom element as an actual map and evaluate at δ0.
            let weights: Vec<Rational> = names.iter().map(|n| hom_element.rep().weight(n)).collect();
            let kept: Vec<(Rational, ConvexMap)> = weights
                .into_iter()
                .zip(composites.iter().cloned())
                .filter(|(w, _)| !w.is_zero())
                .collect();
            let (alpha, ms): (Vec<_>, Vec<_>) = kept.into_iter().unzip();
            let realized = hom_combine(&alpha, &ms)?.evaluate(&d0)?.into_rep();
            (true, realized == biconvex_value)
        }
        Err(Error::RelationViolated { .. }) | Err(Error::Undecided { .. }) => (false, false),
        Err(e) => return Err(e),
    };

    Ok(CounterexampleReport {
        unequal,
        quoted_value_matches_definitions: quoted == convex_hypothesis_value,
        biconvex_value,
        convex_hypothesis_value,
        quoted_hypothesis_value: quoted,
        composition_is_biconvex,
        tensor_route_agrees,
    })
}

/// A category whose hom-sets are presented convex sets and whose
/// composition is given on generator pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiconvexCategory {
    pub objects: Vec<String>,
    pub homs: BTreeMap<(String, String), Arc<Presentation>>,
    pub identities: BTreeMap<String, Distribution>,
    /// `(a, b, c) ↦ {(g, f) ↦ g∘f}` with `f ∈ Hom(a,b)`, `g ∈ Hom(b,c)`.
    pub composition: BTreeMap<(String, String, String), BTreeMap<(String, String), Distribution>>,
}

/// The same category with composition as convex maps
/// `Hom(b,c) ⊗ Hom(a,b) → Hom(a,c)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnrichedCategoryData {
    pub objects: Vec<String>,
    pub homs: BTreeMap<(String, String), Arc<Presentation>>,
    pub identities: BTreeMap<String, Distribution>,
    pub composition: BTreeMap<(String, String, String), ConvexMap>,
}

impl BiconvexCategory {
    fn hom(&self, a: &str, b: &str) -> Option<&Arc<Presentation>> {
        self.homs.get(&(a.to_string(), b.to_string()))
    }

    /// Composable object triples with both homs present.
    fn triples(&self) -> Vec<(String, String, String)> {
        let mut out = Vec::new();
        for a in &self.objects {
            for b in &self.objects {
                for c in &self.objects {
                    if self.hom(a, b).is_some() && self.hom(b, c).is_some() {
                        out.push((a.clone(), b.clone(), c.clone()));
                    }
                }
            }
        }
        out
    }

    /// Compares hom tables up to equality in the hom presentations.
    pub fn equivalent(&self, other: &BiconvexCategory, bound: usize) -> Result<bool> {
        if self.objects != other.objects || self.homs != other.homs {
            return Ok(false);
        }
        for (obj, id) in &self.identities {
            let Some(oid) = other.identities.get(obj) else { return Ok(false) };
            if self.hom(obj, obj).expect("identity hom").decide(id, oid, bound)?.status() != EqualityStatus::Equal {
                return Ok(false);
            }
        }
        for (key, table) in &self.composition {
            let Some(otable) = other.composition.get(key) else { return Ok(false) };
            let hom = self.hom(&key.0, &key.2).ok_or(Error::InvalidInput("missing hom".into()))?;
            for (pair, v) in table {
                let Some(ov) = otable.get(pair) else { return Ok(false) };
                if hom.decide(v, ov, bound)?.status() != EqualityStatus::Equal {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Turns biconvex composition tables into convex maps out of tensors.
pub fn enriched_bridge(cat: &BiconvexCategory, bound: usize) -> Result<EnrichedCategoryData> {
    let mut composition = BTreeMap::new();
    for (a, b, c) in cat.triples() {
        let hbc = cat.hom(&b, &c).expect("triple").clone();
        let hab = cat.hom(&a, &b).expect("triple").clone();
        let Some(hac) = cat.hom(&a, &c).cloned() else {
            if hbc.generators().is_empty() || hab.generators().is_empty() {
                continue;
            }
            return Err(Error::CompositionNotBiconvex(format!("no hom {a} -> {c} for composites")));
        };
        let empty = BTreeMap::new();
        let table = cat.composition.get(&(a.clone(), b.clone(), c.clone())).unwrap_or(&empty);
        let spec = NConvexMapSpec::new(
            vec![hbc, hab],
            hac,
            table.iter().map(|((g, f), v)| (vec![g.clone(), f.clone()], v.clone())).collect(),
        )
        .map_err(|e| Error::CompositionNotBiconvex(format!("{a} -> {b} -> {c}: {e}")))?;
        let map = extend_multiconvex(&spec, bound).map_err(|e| match e {
            Error::RelationViolated { .. } | Error::Undecided { .. } => {
                Error::CompositionNotBiconvex(format!("{a} -> {b} -> {c}: {e}"))
            }
            other => other,
        })?;
        composition.insert((a, b, c), map);
    }
    Ok(EnrichedCategoryData {
        objects: cat.objects.clone(),
        homs: cat.homs.clone(),
        identities: cat.identities.clone(),
        composition,
    })
}

/// Restricts composition maps back to generator tables.
pub fn enriched_inverse(data: &EnrichedCategoryData) -> Result<BiconvexCategory> {
    let mut composition = BTreeMap::new();
    for (key, map) in &data.composition {
        let hbc = &data.homs[&(key.1.clone(), key.2.clone())];
        let hab = &data.homs[&(key.0.clone(), key.1.clone())];
        let t = tensor(&[hbc.clone(), hab.clone()])?;
        let spec = restrict_to_table(&t, map)?;
        let table = spec.table.into_iter().map(|(k, v)| ((k[0].clone(), k[1].clone()), v)).collect();
        composition.insert(key.clone(), table);
    }
    Ok(BiconvexCategory {
        objects: data.objects.clone(),
        homs: data.homs.clone(),
        identities: data.identities.clone(),
        composition,
    })
}

impl EnrichedCategoryData {
    /// Composite of hom elements through the tensor.
    pub fn compose(&self, a: &str, b: &str, c: &str, g: &Distribution, f: &Distribution) -> Result<Distribution> {
        let key = (a.to_string(), b.to_string(), c.to_string());
        let map = self.composition.get(&key).ok_or(Error::InvalidInput(format!("no composition {a}->{b}->{c}")))?;
        map.apply_rep(&expand(&[g, f]))
    }

    /// Unit and associativity laws on generators, decided in the homs.
    pub fn check_laws(&self, bound: usize) -> Result<Vec<String>> {
        let mut failures = Vec::new();
        let same = |hom: &Presentation, x: &Distribution, y: &Distribution| -> Result<bool> {
            Ok(hom.decide(x, y, bound)?.is_equal())
        };
        for ((a, b), hom) in &self.homs {
            let (ida, idb) = (&self.identities[a], &self.identities[b]);
            for g in hom.generators() {
                let d = Distribution::delta(g.clone());
                if !same(hom, &self.compose(a, b, b, idb, &d)?, &d)? {
                    failures.push(format!("left unit fails at {g} in {a}->{b}"));
                }
                if !same(hom, &self.compose(a, a, b, &d, ida)?, &d)? {
                    failures.push(format!("right unit fails at {g} in {a}->{b}"));
                }
            }
        }
        let keys: BTreeSet<_> = self.composition.keys().cloned().collect();
        for (a, b, c) in &keys {
            for d in &self.objects {
                if !keys.contains(&(b.clone(), c.clone(), d.clone()))
                    || !keys.contains(&(a.clone(), c.clone(), d.clone()))
                    || !keys.contains(&(a.clone(), b.clone(), d.clone()))
                {
                    continue;
                }
                let hab = &self.homs[&(a.clone(), b.clone())];
                let hbc = &self.homs[&(b.clone(), c.clone())];
                let hcd = &self.homs[&(c.clone(), d.clone())];
                let had = &self.homs[&(a.clone(), d.clone())];
                for f in hab.generators() {
                    for g in hbc.generators() {
                        for h in hcd.generators() {
                            let (f, g, h) = (
                                Distribution::delta(f.clone()),
                                Distribution::delta(g.clone()),
                                Distribution::delta(h.clone()),
                            );
                            let left = self.compose(a, c, d, &h, &self.compose(a, b, c, &g, &f)?)?;
                            let right = self.compose(a, b, d, &self.compose(b, c, d, &h, &g)?, &f)?;
                            if !same(had, &left, &right)? {
                                failures.push(format!("associativity fails at {h}, {g}, {f}"));
                            }
                        }
                    }
                }
            }
        }
        Ok(failures)
    }
}

/// Example categories for the bridge.
pub mod examples {
    use super::*;

    fn d(x: &str) -> Distribution {
        Distribution::delta(x.to_string())
    }

    fn key(a: &str, b: &str) -> (String, String) {
        (a.to_string(), b.to_string())
    }

    fn key3(a: &str, b: &str, c: &str) -> (String, String, String) {
        (a.to_string(), b.to_string(), c.to_string())
    }

    fn table(entries: &[(&str, &str, Distribution)]) -> BTreeMap<(String, String), Distribution> {
        entries.iter().map(|(g, f, v)| ((g.to_string(), f.to_string()), v.clone())).collect()
    }

    /// One object whose only endomorphism is the identity.
    pub fn trivial() -> BiconvexCategory {
        let hom = Arc::new(Presentation::free(["id"]).expect("one generator"));
        BiconvexCategory {
            objects: vec!["*".into()],
            homs: [(key("*", "*"), hom)].into_iter().collect(),
            identities: [("*".to_string(), d("id"))].into_iter().collect(),
            composition: [(key3("*", "*", "*"), table(&[("id", "id", d("id"))]))].into_iter().collect(),
        }
    }

    /// Two objects and a free pair of parallel arrows between them.
    pub fn parallel_pair() -> BiconvexCategory {
        let free = |gs: &[&str]| Arc::new(Presentation::free(gs.iter().copied()).expect("distinct"));
        BiconvexCategory {
            objects: vec!["X".into(), "Y".into()],
            homs: [
                (key("X", "X"), free(&["idX"])),
                (key("Y", "Y"), free(&["idY"])),
                (key("X", "Y"), free(&["u", "v"])),
            ]
            .into_iter()
            .collect(),
            identities: [("X".to_string(), d("idX")), ("Y".to_string(), d("idY"))].into_iter().collect(),
            composition: [
                (key3("X", "X", "X"), table(&[("idX", "idX", d("idX"))])),
                (key3("Y", "Y", "Y"), table(&[("idY", "idY", d("idY"))])),
                (key3("X", "X", "Y"), table(&[("u", "idX", d("u")), ("v", "idX", d("v"))])),
                (key3("X", "Y", "Y"), table(&[("idY", "u", d("u")), ("idY", "v", d("v"))])),
            ]
            .into_iter()
            .collect(),
        }
    }

    /// The identity/swap and two-embedding example with a midpoint map
    /// `gm ~ ½g0 + ½g1`. With `corrupt` the composite `f0∘gm` is replaced
    /// by `f0`, which no biconvex composition allows.
    pub fn swap_embeddings(corrupt: bool) -> BiconvexCategory {
        let half = |a: &str, b: &str| {
            Distribution::new([(a.to_string(), q(1, 2)), (b.to_string(), q(1, 2))]).expect("half")
        };
        let hxx = Arc::new(
            Presentation::new(vec!["g0".into(), "g1".into(), "gm".into()], vec![(d("gm"), half("g0", "g1"))])
                .expect("valid"),
        );
        let hxy = Arc::new(Presentation::free(["f0", "f0s", "f1", "f1s"]).expect("distinct"));
        let hyy = Arc::new(Presentation::free(["idY"]).expect("one"));
        let mut xxx = Vec::new();
        for a in ["g0", "g1", "gm"] {
            for b in ["g0", "g1", "gm"] {
                // id and swap form a group; the midpoint composes affinely.
                let v = match (a, b) {
                    ("gm", _) | (_, "gm") => half("g0", "g1"),
                    ("g0", x) | (x, "g0") => d(x),
                    _ => d("g0"),
                };
                xxx.push((a, b, v));
            }
        }
        let mut xxy = vec![
            ("f0", "g0", d("f0")),
            ("f0", "g1", d("f0s")),
            ("f1", "g0", d("f1")),
            ("f1", "g1", d("f1s")),
            ("f0", "gm", half("f0", "f0s")),
            ("f1", "gm", half("f1", "f1s")),
            ("f0s", "g0", d("f0s")),
            ("f0s", "g1", d("f0")),
            ("f1s", "g0", d("f1s")),
            ("f1s", "g1", d("f1")),
            ("f0s", "gm", half("f0", "f0s")),
            ("f1s", "gm", half("f1", "f1s")),
        ];
        if corrupt {
            xxy[4] = ("f0", "gm", d("f0"));
        }
        let xyy: Vec<_> = ["f0", "f0s", "f1", "f1s"].iter().map(|f| ("idY", *f, d(f))).collect();
        BiconvexCategory {
            objects: vec!["X".into(), "Y".into()],
            homs: [(key("X", "X"), hxx), (key("X", "Y"), hxy), (key("Y", "Y"), hyy)].into_iter().collect(),
            identities: [("X".to_string(), d("g0")), ("Y".to_string(), d("idY"))].into_iter().collect(),
            composition: [
                (key3("X", "X", "X"), table(&xxx)),
                (key3("X", "X", "Y"), table(&xxy)),
                (key3("X", "Y", "Y"), table(&xyy)),
                (key3("Y", "Y", "Y"), table(&[("idY", "idY", d("idY"))])),
            ]
            .into_iter()
            .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{delta, dist};

    fn free(gs: &[&str]) -> Arc<Presentation> {
        Arc::new(Presentation::free(gs.iter().copied()).unwrap())
    }

    #[test]
    fn free_factors_give_product_generators() {
        let t = tensor(&[free(&["a", "b"]), free(&["c"])]).unwrap();
        let gens: Vec<_> = t.tuples().cloned().collect();
        assert_eq!(gens, vec![vec!["a".to_string(), "c".into()], vec!["b".into(), "c".into()]]);
        assert!(t.presentation().is_free());
        assert!(matches!(tensor(&[]), Err(Error::EmptyFactorList)));
    }

    #[test]
    fn relations_are_lifted_along_other_slots() {
        let x = Arc::new(Presentation::new(vec!["a".into(), "b".into()], vec![(delta("a"), delta("b"))]).unwrap());
        let t = tensor(&[x, free(&["c", "d"])]).unwrap();
        assert_eq!(t.presentation().relations().len(), 2);
        let (r, s) = &t.presentation().relations()[1];
        assert_eq!(r, &delta(&tuple_name(&["a", "d"])));
        assert_eq!(s, &delta(&tuple_name(&["b", "d"])));
    }

    #[test]
    fn universal_map_expands_products() {
        let x = free(&["a", "b"]);
        let y = free(&["c", "d"]);
        let t = tensor(&[x.clone(), y.clone()]).unwrap();
        let px = x.element(dist(&[("a", q(1, 2)), ("b", q(1, 2))])).unwrap();
        let py = y.element(dist(&[("c", q(1, 3)), ("d", q(2, 3))])).unwrap();
        let out = t.universal_map(&[px.clone(), py]).unwrap();
        let name = |a: &str, b: &str| tuple_name(&[a, b]);
        let expected = Distribution::new([
            (name("a", "c"), q(1, 6)),
            (name("a", "d"), q(1, 3)),
            (name("b", "c"), q(1, 6)),
            (name("b", "d"), q(1, 3)),
        ])
        .unwrap();
        assert_eq!(out.rep(), &expected);
        let pure = t.universal_map(&[x.generator("a").unwrap(), y.generator("c").unwrap()]).unwrap();
        assert_eq!(pure.rep(), &delta(&name("a", "c")));
        assert!(matches!(t.universal_map(&[py_wrong(&y), px]), Err(Error::FactorMismatch(0))));
    }

    fn py_wrong(y: &Arc<Presentation>) -> PresentedElement {
        y.generator("c").unwrap()
    }

    #[test]
    fn projection_table_extends() {
        let x = free(&["a", "b"]);
        let y = free(&["c"]);
        let table = [(vec!["a".into(), "c".into()], delta("a")), (vec!["b".into(), "c".into()], delta("b"))]
            .into_iter()
            .collect();
        let spec = NConvexMapSpec::new(vec![x.clone(), y], x, table).unwrap();
        let map = extend_multiconvex(&spec, 4).unwrap();
        let t = tensor(&spec.factors).unwrap();
        assert_eq!(restrict_to_table(&t, &map).unwrap(), spec);
    }

    #[test]
    fn lifted_relation_violation_is_reported() {
        let x = Arc::new(Presentation::new(vec!["a".into(), "b".into()], vec![(delta("a"), delta("b"))]).unwrap());
        let z = free(&["u", "v"]);
        let table = [(vec!["a".into()], delta("u")), (vec!["b".into()], delta("v"))].into_iter().collect();
        let spec = NConvexMapSpec::new(vec![x], z, table).unwrap();
        assert!(matches!(extend_multiconvex(&spec, 4), Err(Error::RelationViolated { .. })));
    }

    #[test]
    fn coherence_maps_are_isomorphisms_and_diagrams_commute() {
        let (a, b, c, d) = (free(&["a0", "a1"]), free(&["b0", "b1"]), free(&["c0"]), free(&["d0", "d1"]));
        for (kind, fs) in [
            (CoherenceKind::Associator, vec![a.clone(), b.clone(), c.clone()]),
            (CoherenceKind::LeftUnitor, vec![a.clone()]),
            (CoherenceKind::RightUnitor, vec![b.clone()]),
            (CoherenceKind::Braiding, vec![a.clone(), d.clone()]),
        ] {
            let (f, g) = coherence(kind, &fs).unwrap();
            assert!(is_isomorphism(&f, &g, 0).unwrap(), "{kind:?}");
        }
        let checks = check_coherence_diagrams(&a, &b, &c, &d, 0).unwrap();
        assert_eq!(checks.len(), 7);
        assert!(checks.iter().all(|c| c.commutes), "{checks:?}");
        assert!(matches!(
            coherence(CoherenceKind::Braiding, &[a]),
            Err(Error::ArityMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn left_unitor_drops_the_unit_slot() {
        let x = free(&["g", "h"]);
        let (l, _) = coherence(CoherenceKind::LeftUnitor, &[x]).unwrap();
        assert_eq!(l.image(&tuple_name(&["•", "g"])), Some(&delta("g")));
    }

    #[test]
    fn counterexample_values() {
        let report = check_biconvex_not_convex_counterexample(4).unwrap();
        let uniform = Distribution::uniform(["0", "1", "2", "3"].map(String::from)).unwrap();
        assert_eq!(report.biconvex_value, uniform);
        assert_eq!(report.convex_hypothesis_value, dist(&[("0", q(1, 2)), ("3", q(1, 2))]));
        assert!(report.unequal);
        assert!(!report.quoted_value_matches_definitions);
        assert!(report.composition_is_biconvex);
        assert!(report.tensor_route_agrees);
    }

    #[test]
    fn hom_hull_finds_midpoint_relation() {
        let x = free(&["0", "1"]);
        let id = ConvexMap::identity(&x);
        let swap = ConvexMap::from_images_unchecked(
            x.clone(),
            x.clone(),
            [("0".to_string(), delta("1")), ("1".to_string(), delta("0"))].into_iter().collect(),
        )
        .unwrap();
        let mid = hom_combine(&[q(1, 2), q(1, 2)], &[id.clone(), swap.clone()]).unwrap();
        let p = hom_subpresentation(&["g0".into(), "g1".into(), "gm".into()], &[id, swap, mid]).unwrap();
        assert_eq!(p.relations().len(), 1);
        let (r, s) = &p.relations()[0];
        let gm = delta("gm");
        let half = dist(&[("g0", q(1, 2)), ("g1", q(1, 2))]);
        assert!((r == &half && s == &gm) || (r == &gm && s == &half));
    }

    #[test]
    fn bridge_round_trips_and_rejects_corruption() {
        for cat in [examples::trivial(), examples::parallel_pair(), examples::swap_embeddings(false)] {
            let data = enriched_bridge(&cat, 4).unwrap();
            assert!(data.check_laws(4).unwrap().is_empty());
            let back = enriched_inverse(&data).unwrap();
            assert_eq!(back, cat);
        }
        assert!(matches!(
            enriched_bridge(&examples::swap_embeddings(true), 4),
            Err(Error::CompositionNotBiconvex(_))
        ));
    }

    #[test]
    fn spec_json_round_trip() {
        let x = free(&["a"]);
        let table = [(vec!["a".into(), "a".into()], delta("a"))].into_iter().collect();
        let spec = NConvexMapSpec::new(vec![x.clone(), x.clone()], x, table).unwrap();
        let text = spec.to_json().to_string();
        assert_eq!(NConvexMapSpec::from_json(&text).unwrap(), spec);
    }
}
