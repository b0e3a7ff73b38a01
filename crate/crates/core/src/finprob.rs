//! Finite probability spaces with measure-preserving maps, Shannon entropy
//! and the information-loss functional.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::category::{grothendieck, pair_name, FiniteCategory, SetFunctor};
use crate::error::{Error, Result};
use crate::omon::{FinCoproduct, SymmetricMonoidalBase};
use crate::prop::QConvOp;
use crate::semiring::{format_rational, is_convex_vector, parse_rational, q, qi, Rational};

/// The sign convention used for information loss, recorded in reports.
pub const SIGN_CONVENTION: &str = "info_loss = H(source) - H(target), nonnegative on measure-preserving maps";

/// A probability measure on `{0, …, n-1}`; zero weights are allowed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProbObject {
    p: Vec<Rational>,
}

impl ProbObject {
    pub fn new(p: Vec<Rational>) -> Result<Self> {
        if !is_convex_vector(&p) {
            return Err(Error::NotConvexVector);
        }
        Ok(ProbObject { p })
    }

    pub fn uniform(n: usize) -> Self {
        ProbObject { p: vec![q(1, n as i64); n] }
    }

    pub fn delta(n: usize, at: usize) -> Self {
        ProbObject { p: (0..n).map(|i| if i == at { qi(1) } else { qi(0) }).collect() }
    }

    pub fn size(&self) -> usize {
        self.p.len()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.p
    }

    pub fn label(&self) -> String {
        self.p.iter().map(format_rational).collect::<Vec<_>>().join(",")
    }

    /// Pushforward along a function into `{0, …, m-1}`.
    pub fn pushforward(&self, map: &[usize], m: usize) -> Result<Self> {
        if map.len() != self.p.len() || map.iter().any(|&y| y >= m) {
            return Err(Error::InvalidInput(format!("{map:?} is not a function into {m} points")));
        }
        let mut out = vec![qi(0); m];
        for (x, &y) in map.iter().enumerate() {
            out[y] += &self.p[x];
        }
        Ok(ProbObject { p: out })
    }
}

/// Shannon entropy in nats with `0 ln 0 = 0`.
pub fn shannon_entropy(obj: &ProbObject) -> f64 {
    obj.p
        .iter()
        .map(|w| w.to_f64().expect("finite rational"))
        .filter(|&w| w > 0.0)
        .map(|w| -w * w.ln())
        .sum()
}

/// `h(λ) = −λ ln λ − (1−λ) ln(1−λ)`.
pub fn binary_entropy(lambda: f64) -> f64 {
    [lambda, 1.0 - lambda].iter().filter(|&&w| w > 0.0).map(|&w| -w * w.ln()).sum()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProbMorphism {
    source: ProbObject,
    target: ProbObject,
    map: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct MorphismJson {
    source: Vec<String>,
    target: Vec<String>,
    map: Vec<usize>,
}

impl ProbMorphism {
    /// Validates that `map` is measure preserving, exactly.
    pub fn new(source: ProbObject, target: ProbObject, map: Vec<usize>) -> Result<Self> {
        let pushed = source
            .pushforward(&map, target.size())
            .map_err(|e| Error::NotMeasurePreserving(e.to_string()))?;
        if pushed != target {
            return Err(Error::NotMeasurePreserving(format!("pushforward is [{}], target is [{}]", pushed.label(), target.label())));
        }
        Ok(ProbMorphism { source, target, map })
    }

    /// The morphism onto the pushforward measure.
    pub fn onto_pushforward(source: ProbObject, map: Vec<usize>, m: usize) -> Result<Self> {
        let target = source.pushforward(&map, m)?;
        Ok(ProbMorphism { source, target, map })
    }

    pub fn identity(obj: &ProbObject) -> Self {
        ProbMorphism { source: obj.clone(), target: obj.clone(), map: (0..obj.size()).collect() }
    }

    /// Collapse to the one-point space.
    pub fn collapse(obj: &ProbObject) -> Self {
        ProbMorphism { source: obj.clone(), target: ProbObject::delta(1, 0), map: vec![0; obj.size()] }
    }

    pub fn source(&self) -> &ProbObject {
        &self.source
    }

    pub fn target(&self) -> &ProbObject {
        &self.target
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &ProbMorphism) -> Result<ProbMorphism> {
        if first.target != self.source {
            return Err(Error::InvalidInput("morphisms are not composable".into()));
        }
        Ok(ProbMorphism {
            source: first.source.clone(),
            target: self.target.clone(),
            map: first.map.iter().map(|&y| self.map[y]).collect(),
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let raw = MorphismJson {
            source: self.source.p.iter().map(format_rational).collect(),
            target: self.target.p.iter().map(format_rational).collect(),
            map: self.map.clone(),
        };
        serde_json::to_value(raw).expect("morphism serializes")
    }

    fn from_raw(raw: MorphismJson) -> Result<Self> {
        let parse = |ws: &[String]| ws.iter().map(|w| parse_rational(w)).collect::<Result<Vec<_>>>();
        Self::new(ProbObject::new(parse(&raw.source)?)?, ProbObject::new(parse(&raw.target)?)?, raw.map)
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        Self::from_raw(serde_json::from_value(value.clone())?)
    }
}

/// `H(source) − H(target)`.
pub fn info_loss(m: &ProbMorphism) -> f64 {
    shannon_entropy(&m.source) - shannon_entropy(&m.target)
}

/// `λf + (1−λ)g` on disjoint unions. Both summands stay in the carrier
/// even when their weight is zero.
pub fn convex_combine_morphisms(lambda: &Rational, f: &ProbMorphism, g: &ProbMorphism) -> Result<ProbMorphism> {
    if *lambda < qi(0) || *lambda > qi(1) {
        return Err(Error::InvalidInput(format!("λ = {} is outside [0, 1]", format_rational(lambda))));
    }
    let mu = qi(1) - lambda;
    let mix = |a: &ProbObject, b: &ProbObject| ProbObject {
        p: a.p.iter().map(|w| w * lambda).chain(b.p.iter().map(|w| w * &mu)).collect(),
    };
    let shift = f.target.size();
    Ok(ProbMorphism {
        source: mix(&f.source, &g.source),
        target: mix(&f.target, &g.target),
        map: f.map.iter().copied().chain(g.map.iter().map(|y| y + shift)).collect(),
    })
}

/// `ξ_α(p_1, …, p_n) = Σ α_i p_i` on the disjoint union of the carriers.
pub fn dist_lax_xi(alpha: &QConvOp, ps: &[ProbObject]) -> Result<ProbObject> {
    if alpha.arity() != ps.len() {
        return Err(Error::ArityMismatch { expected: alpha.arity(), found: ps.len() });
    }
    let p = alpha.weights().iter().zip(ps).flat_map(|(a, pi)| pi.p.iter().map(move |w| a * w)).collect();
    ProbObject::new(p)
}

/// A candidate information functional.
#[derive(Clone, Debug)]
pub enum Candidate {
    InfoLoss,
    Scaled(f64),
    Squared,
    /// Values looked up by morphism; missing entries evaluate to NaN.
    Table(Vec<(ProbMorphism, f64)>),
}

impl Candidate {
    pub fn evaluate(&self, m: &ProbMorphism) -> f64 {
        match self {
            Candidate::InfoLoss => info_loss(m),
            Candidate::Scaled(c) => c * info_loss(m),
            Candidate::Squared => info_loss(m).powi(2),
            Candidate::Table(rows) => rows.iter().find(|(k, _)| k == m).map_or(f64::NAN, |(_, v)| *v),
        }
    }

    /// Parses `info_loss`, `squared`, `scaled:<c>`; tables are loaded by
    /// [`Candidate::table_from_json`].
    pub fn parse(spec: &str) -> Result<Self> {
        match spec {
            "info_loss" => Ok(Candidate::InfoLoss),
            "squared" => Ok(Candidate::Squared),
            _ => match spec.strip_prefix("scaled:") {
                Some(c) => c.parse().map(Candidate::Scaled).map_err(|_| Error::Parse(format!("bad scale {c:?}"))),
                None => Err(Error::Parse(format!("unknown candidate {spec:?}"))),
            },
        }
    }

    /// `[{"morphism": {...}, "value": 0.69}, ...]`
    pub fn table_from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            morphism: MorphismJson,
            value: f64,
        }
        let rows: Vec<Row> = serde_json::from_str(text)?;
        Ok(Candidate::Table(
            rows.into_iter().map(|r| Ok((ProbMorphism::from_raw(r.morphism)?, r.value))).collect::<Result<_>>()?,
        ))
    }
}

/// Morphisms to test the three conditions on.
#[derive(Clone, Debug, Default)]
pub struct Corpus {
    /// `(first, second)` with `second ∘ first` defined.
    pub composable: Vec<(ProbMorphism, ProbMorphism)>,
    pub convex: Vec<(Rational, ProbMorphism, ProbMorphism)>,
    pub continuity: Vec<ProbMorphism>,
}

#[derive(Serialize, Deserialize)]
struct CorpusJson {
    #[serde(default)]
    composable: Vec<PairJson>,
    #[serde(default)]
    convex: Vec<ConvexJson>,
    #[serde(default)]
    continuity: Vec<MorphismJson>,
}

#[derive(Serialize, Deserialize)]
struct PairJson {
    first: MorphismJson,
    second: MorphismJson,
}

#[derive(Serialize, Deserialize)]
struct ConvexJson {
    lambda: String,
    f: MorphismJson,
    g: MorphismJson,
}

impl Corpus {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: CorpusJson = serde_json::from_str(text)?;
        let composable = raw
            .composable
            .into_iter()
            .map(|p| {
                let (a, b) = (ProbMorphism::from_raw(p.first)?, ProbMorphism::from_raw(p.second)?);
                b.after(&a)?;
                Ok((a, b))
            })
            .collect::<Result<_>>()?;
        let convex = raw
            .convex
            .into_iter()
            .map(|c| Ok((parse_rational(&c.lambda)?, ProbMorphism::from_raw(c.f)?, ProbMorphism::from_raw(c.g)?)))
            .collect::<Result<_>>()?;
        let continuity = raw.continuity.into_iter().map(ProbMorphism::from_raw).collect::<Result<_>>()?;
        Ok(Corpus { composable, convex, continuity })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let m = |x: &ProbMorphism| serde_json::from_value::<MorphismJson>(x.to_json()).expect("round trip");
        let raw = CorpusJson {
            composable: self.composable.iter().map(|(a, b)| PairJson { first: m(a), second: m(b) }).collect(),
            convex: self.convex.iter().map(|(l, f, g)| ConvexJson { lambda: format_rational(l), f: m(f), g: m(g) }).collect(),
            continuity: self.continuity.iter().map(m).collect(),
        };
        serde_json::to_value(raw).expect("corpus serializes")
    }

    /// Every morphism the report fits `c` against.
    fn all_morphisms(&self) -> Vec<ProbMorphism> {
        let mut out = Vec::new();
        for (a, b) in &self.composable {
            out.extend([a.clone(), b.clone(), b.after(a).expect("validated")]);
        }
        for (l, f, g) in &self.convex {
            out.extend([f.clone(), g.clone(), convex_combine_morphisms(l, f, g).expect("λ in range")]);
        }
        out.extend(self.continuity.iter().cloned());
        out
    }
}

fn random_object(rng: &mut ChaCha8Rng, n: usize) -> ProbObject {
    let mut ws: Vec<i64> = (0..n).map(|_| if rng.gen_bool(0.2) { 0 } else { rng.gen_range(1..=9) }).collect();
    if ws.iter().all(|&w| w == 0) {
        ws[rng.gen_range(0..n)] = 1;
    }
    let total: i64 = ws.iter().sum();
    ProbObject { p: ws.into_iter().map(|w| q(w, total)).collect() }
}

fn random_map(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..m)).collect()
}

/// A seeded corpus: `count` composable pairs and convex pairs (λ on the
/// grid of eighths) and continuity morphisms, carriers of size `≤ max_carrier`.
pub fn generate_corpus(seed: u64, count: usize, max_carrier: usize) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut corpus = Corpus::default();
    let morphism = |rng: &mut ChaCha8Rng| {
        let n = rng.gen_range(1..=max_carrier);
        let m = rng.gen_range(1..=max_carrier);
        let src = random_object(rng, n);
        let map = random_map(rng, n, m);
        ProbMorphism::onto_pushforward(src, map, m).expect("random map is total")
    };
    for _ in 0..count {
        let first = morphism(&mut rng);
        let l = rng.gen_range(1..=max_carrier);
        let map = random_map(&mut rng, first.target.size(), l);
        let second = ProbMorphism::onto_pushforward(first.target.clone(), map, l).expect("total");
        corpus.composable.push((first, second));
        let lambda = q(rng.gen_range(0..=8), 8);
        let (f, g) = (morphism(&mut rng), morphism(&mut rng));
        corpus.convex.push((lambda, f, g));
        corpus.continuity.push(morphism(&mut rng));
    }
    corpus
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CheckSummary {
    pub checked: usize,
    pub failures: usize,
    pub max_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
}

impl CheckSummary {
    fn record(&mut self, error: f64, tol: f64, witness: impl FnOnce() -> serde_json::Value) {
        self.checked += 1;
        let error = if error.is_nan() { f64::INFINITY } else { error };
        self.max_error = self.max_error.max(error);
        if error > tol {
            self.failures += 1;
            if self.witness.is_none() {
                self.witness = Some(witness());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyReport {
    pub sign_convention: String,
    pub tolerance: f64,
    pub additivity: CheckSummary,
    pub convexity: CheckSummary,
    pub continuity: CheckSummary,
    /// Least-squares `c` in `F ≈ c · (H(source) − H(target))`.
    pub c: f64,
    pub max_residual: f64,
    pub residuals: Vec<f64>,
}

impl EntropyReport {
    pub fn passed(&self) -> bool {
        self.additivity.passed() && self.convexity.passed() && self.continuity.passed() && self.max_residual <= self.tolerance
    }
}

/// Perturbed measures `p_n = p + (1/n)(u − p)` pushed along the same map.
pub fn perturbation(m: &ProbMorphism, n: u64) -> ProbMorphism {
    let size = m.source.size();
    let t = Rational::new(1.into(), n.into());
    let u = q(1, size as i64);
    let p = m.source.p.iter().map(|w| w + (&u - w) * &t).collect();
    ProbMorphism::onto_pushforward(ProbObject { p }, m.map.clone(), m.target.size()).expect("same map")
}

const CONTINUITY_STEPS: [u64; 5] = [10, 100, 1_000, 100_000, 10_000_000];

/// Checks composition additivity, convexity and continuity of `candidate`
/// on the corpus and fits the scalar `c`.
pub fn verify_entropy_axioms(candidate: &Candidate, corpus: &Corpus, tol: f64) -> EntropyReport {
    let f = |m: &ProbMorphism| candidate.evaluate(m);
    let mut additivity = CheckSummary::default();
    for (a, b) in &corpus.composable {
        let ba = b.after(a).expect("validated");
        let (fa, fb, fba) = (f(a), f(b), f(&ba));
        additivity.record((fba - fa - fb).abs(), tol, || {
            serde_json::json!({"first": a.to_json(), "second": b.to_json(), "F_first": fa, "F_second": fb, "F_composite": fba})
        });
    }
    let mut convexity = CheckSummary::default();
    for (l, g1, g2) in &corpus.convex {
        let mix = convex_combine_morphisms(l, g1, g2).expect("λ in range");
        let lf = l.to_f64().expect("finite");
        let expected = lf * f(g1) + (1.0 - lf) * f(g2);
        let got = f(&mix);
        convexity.record((got - expected).abs(), tol, || {
            serde_json::json!({"lambda": format_rational(l), "f": g1.to_json(), "g": g2.to_json(), "F_mix": got, "expected": expected})
        });
    }
    let mut continuity = CheckSummary::default();
    for m in &corpus.continuity {
        let limit = f(m);
        let gaps: Vec<f64> = CONTINUITY_STEPS.iter().map(|&n| (f(&perturbation(m, n)) - limit).abs()).collect();
        // The gap at the finest step must be small and no larger than at the coarsest.
        let last = *gaps.last().expect("steps");
        let error = if last <= gaps[0] + tol { last } else { f64::INFINITY };
        continuity.record(error, 1e-4, || serde_json::json!({"morphism": m.to_json(), "gaps": gaps}));
    }
    let all = corpus.all_morphisms();
    let values: Vec<f64> = all.iter().map(f).collect();
    let losses: Vec<f64> = all.iter().map(info_loss).collect();
    let den: f64 = losses.iter().map(|h| h * h).sum();
    let c = if den > 0.0 { values.iter().zip(&losses).map(|(v, h)| v * h).sum::<f64>() / den } else { f64::NAN };
    let residuals: Vec<f64> = values.iter().zip(&losses).map(|(v, h)| v - c * h).collect();
    let max_residual = residuals.iter().fold(0.0f64, |acc, r| if r.is_nan() { f64::INFINITY } else { acc.max(r.abs()) });
    EntropyReport {
        sign_convention: SIGN_CONVENTION.into(),
        tolerance: tol,
        additivity,
        convexity,
        continuity,
        c,
        max_residual,
        residuals,
    }
}

/// Uniform-4 → uniform-2 → point: both steps lose `ln 2`, so the square of
/// information loss is not additive along this pair.
pub fn square_loss_witness() -> (ProbMorphism, ProbMorphism) {
    let first = ProbMorphism::new(ProbObject::uniform(4), ProbObject::uniform(2), vec![0, 0, 1, 1]).expect("halving");
    let second = ProbMorphism::collapse(&ProbObject::uniform(2));
    (first, second)
}

/// The finite set of measures on `{0, …, n-1}` with weights in `(1/d)ℕ`.
fn grid_measures(n: usize, d: usize) -> Vec<ProbObject> {
    fn parts(total: usize, n: usize) -> Vec<Vec<usize>> {
        match n {
            0 if total == 0 => vec![vec![]],
            0 => vec![],
            _ => (0..=total)
                .flat_map(|k| parts(total - k, n - 1).into_iter().map(move |mut r| {
                    r.insert(0, k);
                    r
                }))
                .collect(),
        }
    }
    parts(d, n).into_iter().map(|ks| ProbObject { p: ks.iter().map(|&k| q(k as i64, d as i64)).collect() }).collect()
}

/// FinProb restricted to sets of size `≤ max` and weights in `(1/d)ℕ`,
/// once as a category of elements of the distributions functor and once
/// directly from measure-preserving maps. Returns whether both agree on
/// objects and on every hom-set.
pub fn finprob_via_grothendieck(max: usize, d: usize) -> Result<bool> {
    let fin = FinCoproduct::new(max);
    let cat: Arc<FiniteCategory> = fin.category().clone();
    let measures: BTreeMap<String, Vec<ProbObject>> =
        cat.objects().iter().map(|o| (o.clone(), grid_measures(o.parse().expect("size"), d))).collect();
    let sets = measures.iter().map(|(o, ms)| (o.clone(), ms.iter().map(ProbObject::label).collect())).collect();
    let mut maps = BTreeMap::new();
    for m in cat.morphisms() {
        let (_, b, values) = fin.parse_map(&m.id).expect("function name");
        let map = measures[&m.src]
            .iter()
            .map(|p| Ok((p.label(), p.pushforward(&values, b)?.label())))
            .collect::<Result<BTreeMap<_, _>>>()?;
        maps.insert(m.id.clone(), map);
    }
    let dist = SetFunctor::new(cat.clone(), sets, maps)?;
    let total = grothendieck(&dist)?;

    let direct_objects: BTreeSet<String> =
        measures.iter().flat_map(|(o, ms)| ms.iter().map(move |p| pair_name(o, &p.label()))).collect();
    let total_objects: BTreeSet<String> = total.total().objects().iter().cloned().collect();
    if direct_objects != total_objects {
        return Ok(false);
    }
    let mut direct_homs = BTreeSet::new();
    for (a, ps) in &measures {
        for (b, qs) in &measures {
            let (na, nb): (usize, usize) = (a.parse().expect("size"), b.parse().expect("size"));
            for values in crate::tensor::product(&vec![(0..nb).collect::<Vec<_>>(); na]) {
                for p in ps {
                    for qm in qs {
                        if ProbMorphism::new(p.clone(), qm.clone(), values.clone()).is_ok() {
                            let name = FinCoproduct::map_name(na, nb, &values);
                            direct_homs.insert((pair_name(a, &p.label()), pair_name(b, &qm.label()), name));
                        }
                    }
                }
            }
        }
    }
    let total_homs: BTreeSet<(String, String, String)> = total
        .total()
        .morphisms()
        .map(|m| (m.src.clone(), m.tgt.clone(), total.projection.on_morphisms[&m.id].clone()))
        .collect();
    Ok(direct_homs == total_homs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_values() {
        assert_eq!(shannon_entropy(&ProbObject::delta(3, 1)), 0.0);
        assert!((shannon_entropy(&ProbObject::uniform(2)) - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((shannon_entropy(&ProbObject::uniform(4)) - 2.0 * std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn measure_preservation_is_exact() {
        let p = ProbObject::new(vec![q(1, 3), q(2, 3)]).unwrap();
        assert!(ProbMorphism::new(p.clone(), ProbObject::delta(1, 0), vec![0, 0]).is_ok());
        let bad = ProbMorphism::new(p, ProbObject::uniform(2), vec![0, 1]);
        assert!(matches!(bad, Err(Error::NotMeasurePreserving(_))));
    }

    #[test]
    fn info_loss_examples() {
        let u2 = ProbObject::uniform(2);
        assert_eq!(info_loss(&ProbMorphism::identity(&u2)), 0.0);
        assert!((info_loss(&ProbMorphism::collapse(&u2)) - std::f64::consts::LN_2).abs() < 1e-12);
        let swap = ProbMorphism::new(u2.clone(), u2, vec![1, 0]).unwrap();
        assert!(info_loss(&swap).abs() < 1e-15);
    }

    #[test]
    fn combining_identities() {
        let id = ProbMorphism::identity(&ProbObject::uniform(2));
        let mix = convex_combine_morphisms(&q(1, 2), &id, &id).unwrap();
        assert_eq!(mix, ProbMorphism::identity(&ProbObject::uniform(4)));
        let collapse = ProbMorphism::collapse(&ProbObject::uniform(2));
        let edge = convex_combine_morphisms(&qi(1), &collapse, &id).unwrap();
        assert_eq!(edge.source().size(), 4);
        assert!((info_loss(&edge) - info_loss(&collapse)).abs() < 1e-12);
    }

    #[test]
    fn grouping_example() {
        let mix = dist_lax_xi(&QConvOp::new(vec![q(1, 2), q(1, 2)]).unwrap(), &[ProbObject::uniform(2), ProbObject::delta(1, 0)]).unwrap();
        let expected = 0.5 * std::f64::consts::LN_2 + std::f64::consts::LN_2;
        assert!((shannon_entropy(&mix) - expected).abs() < 1e-12);
        assert!((expected - 1.0397207708399179).abs() < 1e-15);
    }

    #[test]
    fn lax_xi_examples() {
        let p = ProbObject::new(vec![q(1, 4), q(3, 4)]).unwrap();
        assert_eq!(dist_lax_xi(&QConvOp::unit(), std::slice::from_ref(&p)).unwrap(), p);
        let two = dist_lax_xi(&QConvOp::new(vec![q(1, 2), q(1, 2)]).unwrap(), &[ProbObject::delta(1, 0), ProbObject::delta(1, 0)]).unwrap();
        assert_eq!(two, ProbObject::uniform(2));
        assert!(matches!(dist_lax_xi(&QConvOp::unit(), &[]), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn axioms_on_small_corpus() {
        let corpus = generate_corpus(7, 20, 8);
        let report = verify_entropy_axioms(&Candidate::InfoLoss, &corpus, 1e-9);
        assert!(report.passed(), "{report:?}");
        assert!((report.c - 1.0).abs() < 1e-6);
        let doubled = verify_entropy_axioms(&Candidate::Scaled(2.0), &corpus, 1e-9);
        assert!(doubled.passed());
        assert!((doubled.c - 2.0).abs() < 1e-6);
    }

    #[test]
    fn squared_loss_fails_additivity() {
        let (a, b) = square_loss_witness();
        let corpus = Corpus { composable: vec![(a, b)], ..Corpus::default() };
        let report = verify_entropy_axioms(&Candidate::Squared, &corpus, 1e-9);
        assert_eq!(report.additivity.failures, 1);
        assert!(report.additivity.witness.is_some());
    }

    #[test]
    fn corpus_json_round_trip() {
        let corpus = generate_corpus(1, 3, 4);
        let back = Corpus::from_json(&corpus.to_json().to_string()).unwrap();
        assert_eq!(back.composable, corpus.composable);
        assert_eq!(back.convex, corpus.convex);
    }

    #[test]
    fn finprob_is_a_category_of_elements() {
        assert!(finprob_via_grothendieck(3, 2).unwrap());
    }
}
