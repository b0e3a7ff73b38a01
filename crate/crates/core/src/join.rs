//! Joins (coproducts) of presented convex sets.
//!
//! A point of `X_1 ⋆ … ⋆ X_n` is a convex weight vector together with a
//! part in each factor carrying nonzero weight. The binary case is the
//! triple `[α, x, y]`.
//!
//! The join is also presented directly as the disjoint union of the factor
//! presentations (generators tagged by factor index), which is what
//! [`JoinElement::flatten`] maps into. Mixing renormalizes per factor; the
//! flattened form shows that this agrees with mixing in the disjoint union.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::distribution::{convex_combine, Distribution};
use crate::error::{Error, Result};
use crate::presented::{quotient_mix, same_presentation, ConvexMap, EqualityStatus, Presentation, PresentedElement};
use crate::semiring::{format_rational, is_convex_vector, parse_rational, Rational};

/// Generator name of factor `i`'s generator `g` inside the flat presentation.
pub fn tagged(i: usize, g: &str) -> String {
    serde_json::to_string(&(i, g)).expect("tuple serialization")
}

#[derive(Debug, PartialEq, Eq)]
pub struct Join {
    factors: Vec<Arc<Presentation>>,
    flat: Arc<Presentation>,
}

impl Join {
    pub fn new(factors: Vec<Arc<Presentation>>) -> Result<Arc<Self>> {
        if factors.is_empty() {
            return Err(Error::EmptyFactorList);
        }
        let mut gens = Vec::new();
        let mut rels = Vec::new();
        for (i, f) in factors.iter().enumerate() {
            gens.extend(f.generators().iter().map(|g| tagged(i, g)));
            for (r, s) in f.relations() {
                rels.push((r.map(|g| tagged(i, g)), s.map(|g| tagged(i, g))));
            }
        }
        let flat = Arc::new(Presentation::new(gens, rels)?);
        Ok(Arc::new(Join { factors, flat }))
    }

    pub fn binary(x: Arc<Presentation>, y: Arc<Presentation>) -> Result<Arc<Self>> {
        Self::new(vec![x, y])
    }

    pub fn factors(&self) -> &[Arc<Presentation>] {
        &self.factors
    }

    pub fn arity(&self) -> usize {
        self.factors.len()
    }

    /// The disjoint-union presentation of the join.
    pub fn flat(&self) -> &Arc<Presentation> {
        &self.flat
    }

    /// The injection `X_i → join` as a convex map into the flat presentation.
    pub fn injection_map(&self, i: usize) -> Result<ConvexMap> {
        let factor = self.factors.get(i).ok_or(Error::FactorMismatch(i))?;
        let images = factor
            .generators()
            .iter()
            .map(|g| (g.clone(), Distribution::delta(tagged(i, g))))
            .collect();
        ConvexMap::from_images_unchecked(factor.clone(), self.flat.clone(), images)
    }
}

fn part_name(i: usize) -> &'static str {
    match i {
        0 => "x",
        1 => "y",
        _ => "indexed",
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinElement {
    join: Arc<Join>,
    weights: Vec<Rational>,
    parts: Vec<Option<Distribution>>,
}

impl JoinElement {
    /// Builds a canonical point: parts with zero weight are dropped, parts
    /// with nonzero weight are required.
    pub fn new(join: &Arc<Join>, weights: Vec<Rational>, parts: Vec<Option<PresentedElement>>) -> Result<Self> {
        let n = join.arity();
        if weights.len() != n || parts.len() != n {
            return Err(Error::LengthMismatch { expected: n, found: weights.len().min(parts.len()) });
        }
        if !is_convex_vector(&weights) {
            return Err(Error::NotConvexVector);
        }
        let mut kept = Vec::with_capacity(n);
        for (i, (w, part)) in weights.iter().zip(parts).enumerate() {
            if w.is_zero() {
                kept.push(None);
                continue;
            }
            let part = part.ok_or(Error::MissingPart(part_name(i)))?;
            if !same_presentation(part.presentation(), &join.factors[i]) {
                return Err(Error::FactorMismatch(i));
            }
            kept.push(Some(part.into_rep()));
        }
        Ok(JoinElement { join: join.clone(), weights, parts: kept })
    }

    pub fn join(&self) -> &Arc<Join> {
        &self.join
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    /// X-side weight of a binary join point.
    pub fn alpha(&self) -> &Rational {
        &self.weights[0]
    }

    pub fn part(&self, i: usize) -> Option<PresentedElement> {
        let rep = self.parts.get(i)?.clone()?;
        Some(PresentedElement::new(self.join.factors[i].clone(), rep).expect("parts are validated"))
    }

    /// `Σ w_i · inj_i(part_i)` in the disjoint-union presentation.
    pub fn flatten(&self) -> PresentedElement {
        let mut pairs = Vec::new();
        for (i, (w, part)) in self.weights.iter().zip(&self.parts).enumerate() {
            if let Some(p) = part {
                pairs.extend(p.scaled_pairs(w).map(|(g, v)| (tagged(i, &g), v)));
            }
        }
        let rep = Distribution::new(pairs).expect("weights are convex");
        PresentedElement::new(self.join.flat.clone(), rep).expect("tagged generators")
    }

    pub fn to_json(&self) -> serde_json::Value {
        let part = |i: usize| match &self.parts[i] {
            Some(p) => serde_json::to_value(p).expect("distribution serializes"),
            None => serde_json::Value::Null,
        };
        if self.join.arity() == 2 {
            serde_json::json!({ "alpha": format_rational(&self.weights[0]), "x": part(0), "y": part(1) })
        } else {
            serde_json::json!({
                "weights": self.weights.iter().map(format_rational).collect::<Vec<_>>(),
                "parts": (0..self.join.arity()).map(part).collect::<Vec<_>>(),
            })
        }
    }

    /// Parses the binary form `{"alpha", "x", "y"}`.
    pub fn from_json(join: &Arc<Join>, value: &serde_json::Value) -> Result<Self> {
        #[derive(Deserialize, Serialize)]
        struct Raw {
            alpha: String,
            x: Option<Distribution>,
            y: Option<Distribution>,
        }
        if join.arity() != 2 {
            return Err(Error::ArityMismatch { expected: 2, found: join.arity() });
        }
        let raw: Raw = serde_json::from_value(value.clone())?;
        let alpha = parse_rational(&raw.alpha)?;
        let x = raw.x.map(|d| PresentedElement::new(join.factors[0].clone(), d)).transpose()?;
        let y = raw.y.map(|d| PresentedElement::new(join.factors[1].clone(), d)).transpose()?;
        join_point(join, alpha, x, y)
    }
}

/// Binary constructor `[α, x, y]`, canonicalized at the endpoints.
pub fn join_point(
    join: &Arc<Join>,
    alpha: Rational,
    x: Option<PresentedElement>,
    y: Option<PresentedElement>,
) -> Result<JoinElement> {
    if join.arity() != 2 {
        return Err(Error::ArityMismatch { expected: 2, found: join.arity() });
    }
    let beta = Rational::one() - &alpha;
    JoinElement::new(join, vec![alpha, beta], vec![x, y])
}

/// The injection of factor `i`.
pub fn inject(join: &Arc<Join>, i: usize, e: PresentedElement) -> Result<JoinElement> {
    let n = join.arity();
    if i >= n {
        return Err(Error::FactorMismatch(i));
    }
    let weights = (0..n).map(|j| if j == i { Rational::one() } else { Rational::zero() }).collect();
    let parts = (0..n).map(|j| (j == i).then(|| e.clone())).collect();
    JoinElement::new(join, weights, parts)
}

/// The structure map of the join, with per-factor renormalization.
pub fn join_mix(beta: &[Rational], pts: &[JoinElement]) -> Result<JoinElement> {
    let Some(first) = pts.first() else {
        return Err(Error::LengthMismatch { expected: beta.len(), found: 0 });
    };
    if beta.len() != pts.len() {
        return Err(Error::LengthMismatch { expected: beta.len(), found: pts.len() });
    }
    if !is_convex_vector(beta) {
        return Err(Error::NotConvexVector);
    }
    let join = &first.join;
    if pts.iter().any(|p| !Arc::ptr_eq(&p.join, join) && *p.join != **join) {
        return Err(Error::PresentationMismatch);
    }
    let n = join.arity();
    let mut weights = Vec::with_capacity(n);
    let mut parts = Vec::with_capacity(n);
    for i in 0..n {
        let contributions: Vec<(Rational, &Distribution)> = beta
            .iter()
            .zip(pts)
            .filter_map(|(b, p)| {
                let w = b * &p.weights[i];
                (!w.is_zero()).then(|| (w, p.parts[i].as_ref().expect("nonzero weight has a part")))
            })
            .collect();
        let total = contributions.iter().fold(Rational::zero(), |acc, (w, _)| acc + w);
        if total.is_zero() {
            parts.push(None);
        } else {
            let alpha: Vec<Rational> = contributions.iter().map(|(w, _)| w / &total).collect();
            let reps: Vec<Distribution> = contributions.iter().map(|(_, d)| (*d).clone()).collect();
            parts.push(Some(convex_combine(&alpha, &reps)?));
        }
        weights.push(total);
    }
    Ok(JoinElement { join: join.clone(), weights, parts })
}

/// Equality in the join: weights must agree exactly, and parts with
/// nonzero weight must be equal in their factor.
///
/// Differing weights are a sound `Distinct` because the weight vector is
/// itself a convex map out of the join.
pub fn join_eq(a: &JoinElement, b: &JoinElement, bound: usize) -> Result<EqualityStatus> {
    if *a.join != *b.join {
        return Err(Error::PresentationMismatch);
    }
    if a.weights != b.weights {
        return Ok(EqualityStatus::Distinct);
    }
    let mut status = EqualityStatus::Equal;
    for (i, (pa, pb)) in a.parts.iter().zip(&b.parts).enumerate() {
        if let (Some(pa), Some(pb)) = (pa, pb) {
            match a.join.factors[i].decide(pa, pb, bound)?.status() {
                EqualityStatus::Distinct => return Ok(EqualityStatus::Distinct),
                EqualityStatus::Unknown => status = EqualityStatus::Unknown,
                EqualityStatus::Equal => {}
            }
        }
    }
    Ok(status)
}

/// The copairing `f_1 ⋆ … ⋆ f_n` out of the join.
#[derive(Clone, Debug)]
pub struct Copair {
    join: Arc<Join>,
    maps: Vec<ConvexMap>,
}

impl Copair {
    pub fn maps(&self) -> &[ConvexMap] {
        &self.maps
    }

    pub fn target(&self) -> &Arc<Presentation> {
        self.maps[0].target()
    }

    /// `[w, x_1, …, x_n] ↦ Σ w_i f_i(x_i)`.
    pub fn evaluate(&self, e: &JoinElement) -> Result<PresentedElement> {
        if *e.join != *self.join {
            return Err(Error::PresentationMismatch);
        }
        let mut alpha = Vec::new();
        let mut images = Vec::new();
        for (i, w) in e.weights.iter().enumerate() {
            if let Some(part) = e.part(i) {
                alpha.push(w.clone());
                images.push(self.maps[i].evaluate(&part)?);
            }
        }
        quotient_mix(&alpha, &images)
    }

    /// The same map as a convex map out of the flat presentation.
    pub fn as_convex_map(&self) -> Result<ConvexMap> {
        let mut images = BTreeMap::new();
        for (i, f) in self.maps.iter().enumerate() {
            for (g, img) in f.images() {
                images.insert(tagged(i, g), img.clone());
            }
        }
        ConvexMap::from_images_unchecked(self.join.flat.clone(), self.target().clone(), images)
    }
}

pub fn copair_n(join: &Arc<Join>, maps: Vec<ConvexMap>) -> Result<Copair> {
    if maps.len() != join.arity() {
        return Err(Error::ArityMismatch { expected: join.arity(), found: maps.len() });
    }
    for (i, f) in maps.iter().enumerate() {
        if !same_presentation(f.source(), &join.factors[i]) {
            return Err(Error::FactorMismatch(i));
        }
        if !same_presentation(f.target(), maps[0].target()) {
            return Err(Error::TargetMismatch);
        }
    }
    Ok(Copair { join: join.clone(), maps })
}

/// Binary copairing `f ⋆ g`.
pub fn copair(join: &Arc<Join>, f: ConvexMap, g: ConvexMap) -> Result<Copair> {
    copair_n(join, vec![f, g])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{delta, dist};
    use crate::semiring::q;

    fn setup() -> (Arc<Presentation>, Arc<Presentation>, Arc<Join>) {
        let x = Arc::new(Presentation::free(["a", "b"]).unwrap());
        let y = Arc::new(Presentation::free(["c"]).unwrap());
        let j = Join::binary(x.clone(), y.clone()).unwrap();
        (x, y, j)
    }

    #[test]
    fn endpoints_are_canonical() {
        let (x, y, j) = setup();
        let xa = x.generator("a").unwrap();
        let yc = y.generator("c").unwrap();
        let p = join_point(&j, q(1, 1), Some(xa.clone()), Some(yc.clone())).unwrap();
        assert!(p.part(1).is_none());
        let p = join_point(&j, q(0, 1), Some(xa.clone()), Some(yc.clone())).unwrap();
        assert!(p.part(0).is_none());
        let p = join_point(&j, q(1, 3), Some(xa.clone()), Some(yc)).unwrap();
        assert_eq!(p.alpha(), &q(1, 3));
        assert_eq!(p.part(0).unwrap(), xa);
        assert!(matches!(join_point(&j, q(1, 2), None, None), Err(Error::MissingPart("x"))));
    }

    #[test]
    fn mixing_endpoints_gives_interior_point() {
        let (x, y, j) = setup();
        let px = inject(&j, 0, x.generator("a").unwrap()).unwrap();
        let py = inject(&j, 1, y.generator("c").unwrap()).unwrap();
        let m = join_mix(&[q(1, 2), q(1, 2)], &[px, py]).unwrap();
        assert_eq!(m.alpha(), &q(1, 2));
        assert_eq!(m.part(0).unwrap().rep(), &delta("a"));
        assert_eq!(m.part(1).unwrap().rep(), &delta("c"));
    }

    #[test]
    fn mixing_renormalizes_per_side() {
        let (x, y, j) = setup();
        let yc = y.generator("c").unwrap();
        let p1 = join_point(&j, q(1, 2), Some(x.generator("a").unwrap()), Some(yc.clone())).unwrap();
        let p2 = join_point(&j, q(1, 2), Some(x.generator("b").unwrap()), Some(yc)).unwrap();
        let m = join_mix(&[q(1, 2), q(1, 2)], &[p1.clone(), p2.clone()]).unwrap();
        assert_eq!(m.alpha(), &q(1, 2));
        assert_eq!(m.part(0).unwrap().rep(), &dist(&[("a", q(1, 2)), ("b", q(1, 2))]));
        // Agrees with mixing the flattened representatives.
        let flat = quotient_mix(&[q(1, 2), q(1, 2)], &[p1.flatten(), p2.flatten()]).unwrap();
        assert_eq!(m.flatten(), flat);
    }

    #[test]
    fn copair_recovers_components() {
        let (x, y, j) = setup();
        let z = Arc::new(Presentation::free(["u", "v"]).unwrap());
        let u = z.generator("u").unwrap();
        let v = z.generator("v").unwrap();
        let f = ConvexMap::constant(&x, &u);
        let g = ConvexMap::constant(&y, &v);
        let h = copair(&j, f, g).unwrap();
        let xa = x.generator("a").unwrap();
        let yc = y.generator("c").unwrap();
        assert_eq!(h.evaluate(&inject(&j, 0, xa.clone()).unwrap()).unwrap(), u);
        assert_eq!(h.evaluate(&inject(&j, 1, yc.clone()).unwrap()).unwrap(), v);
        let mid = join_point(&j, q(1, 2), Some(xa), Some(yc)).unwrap();
        assert_eq!(h.evaluate(&mid).unwrap().rep(), &dist(&[("u", q(1, 2)), ("v", q(1, 2))]));
        assert_eq!(h.as_convex_map().unwrap().evaluate(&mid.flatten()).unwrap(), h.evaluate(&mid).unwrap());
    }

    #[test]
    fn copair_rejects_different_targets() {
        let (x, y, j) = setup();
        let f = ConvexMap::identity(&x);
        let g = ConvexMap::identity(&y);
        assert!(matches!(copair(&j, f, g), Err(Error::TargetMismatch)));
    }

    #[test]
    fn binary_json_round_trip() {
        let (x, y, j) = setup();
        let p = join_point(&j, q(1, 3), Some(x.generator("a").unwrap()), Some(y.generator("c").unwrap())).unwrap();
        let v = p.to_json();
        assert_eq!(v["alpha"], "1/3");
        assert_eq!(JoinElement::from_json(&j, &v).unwrap(), p);
        let endpoint = serde_json::json!({"alpha": "1", "x": {"weights": [{"el": "b", "w": "1"}]}, "y": null});
        assert_eq!(JoinElement::from_json(&j, &endpoint).unwrap().alpha(), &q(1, 1));
    }
}
