//! The distribution monad over a semiring.
//!
//! A [`Distribution`] is a finitely supported weight map whose weights sum
//! to one. Zero weights are never stored, so two distributions are equal
//! exactly when their stored maps are equal.

use std::collections::BTreeMap;
use std::fmt::{self, Debug, Display};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::semiring::{Rational, Semiring};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Distribution<T: Ord = String, S = Rational> {
    weights: BTreeMap<T, S>,
}

impl<T: Ord + Clone + Debug, S: Semiring> Distribution<T, S> {
    /// Builds a distribution from `(element, weight)` pairs. Repeated
    /// elements accumulate; zero weights are dropped.
    pub fn new<I: IntoIterator<Item = (T, S)>>(pairs: I) -> Result<Self> {
        let d = Self::accumulate(pairs);
        for (el, w) in &d.weights {
            if !w.is_admissible() {
                return Err(Error::InvalidDistribution(format!("weight {w:?} on {el:?} is negative")));
            }
        }
        let total = S::sum(d.weights.values());
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!("weights sum to {}", total.to_canonical())));
        }
        Ok(d)
    }

    /// Accumulates without checking normalization; callers guarantee it.
    pub(crate) fn accumulate<I: IntoIterator<Item = (T, S)>>(pairs: I) -> Self {
        let mut weights: BTreeMap<T, S> = BTreeMap::new();
        for (el, w) in pairs {
            if w.is_zero() {
                continue;
            }
            let slot = weights.entry(el).or_insert_with(S::zero);
            *slot = slot.add(&w);
        }
        weights.retain(|_, w| !w.is_zero());
        Distribution { weights }
    }

    /// The unit of the monad: weight one on `x`.
    pub fn delta(x: T) -> Self {
        let mut weights = BTreeMap::new();
        weights.insert(x, S::one());
        Distribution { weights }
    }

    pub fn weight(&self, x: &T) -> S {
        self.weights.get(x).cloned().unwrap_or_else(S::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = &T> {
        self.weights.keys()
    }

    pub fn support_size(&self) -> usize {
        self.weights.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, &S)> {
        self.weights.iter()
    }

    pub fn is_delta(&self) -> Option<&T> {
        if self.weights.len() == 1 {
            self.weights.keys().next()
        } else {
            None
        }
    }

    /// `f_*(p)(y) = sum of p over the fibre of y`. Fails if `f` returns
    /// `None` on a support element.
    pub fn pushforward<U, F>(&self, f: F) -> Result<Distribution<U, S>>
    where
        U: Ord + Clone + Debug,
        F: Fn(&T) -> Option<U>,
    {
        let mut pairs = Vec::with_capacity(self.weights.len());
        for (x, w) in &self.weights {
            let y = f(x).ok_or_else(|| Error::UndefinedOnSupport(format!("{x:?}")))?;
            pairs.push((y, w.clone()));
        }
        Ok(Distribution::accumulate(pairs))
    }

    /// Pushforward along a total function.
    pub fn map<U, F>(&self, f: F) -> Distribution<U, S>
    where
        U: Ord + Clone + Debug,
        F: Fn(&T) -> U,
    {
        Distribution::accumulate(self.weights.iter().map(|(x, w)| (f(x), w.clone())))
    }

    /// `D(delta)`: wraps every support element in a delta.
    pub fn map_delta(&self) -> Distribution<Distribution<T, S>, S> {
        self.map(|x| Distribution::delta(x.clone()))
    }

    /// Kleisli extension: `sum_x p(x) * f(x)`.
    pub fn bind<U, F>(&self, f: F) -> Distribution<U, S>
    where
        U: Ord + Clone + Debug,
        F: Fn(&T) -> Distribution<U, S>,
    {
        let mut pairs = Vec::new();
        for (x, w) in &self.weights {
            for (y, v) in f(x).weights {
                pairs.push((y, w.mul(&v)));
            }
        }
        Distribution::accumulate(pairs)
    }

    /// Checks that every support element satisfies `pred`.
    pub fn supported_on<F: Fn(&T) -> bool>(&self, pred: F) -> bool {
        self.weights.keys().all(pred)
    }

    pub fn into_weights(self) -> BTreeMap<T, S> {
        self.weights
    }
}

impl<T: Ord + Clone + Debug, S: Semiring> Distribution<Distribution<T, S>, S> {
    /// The monad multiplication `mu(P)(x) = sum_q P(q) q(x)`.
    pub fn flatten(&self) -> Distribution<T, S> {
        self.bind(|q| q.clone())
    }
}

/// Convex combination `sum_i alpha_i ps_i` in the free convex set.
pub fn convex_combine<T, S>(alpha: &[S], ps: &[Distribution<T, S>]) -> Result<Distribution<T, S>>
where
    T: Ord + Clone + Debug,
    S: Semiring,
{
    if alpha.len() != ps.len() {
        return Err(Error::LengthMismatch { expected: alpha.len(), found: ps.len() });
    }
    if !crate::semiring::is_convex_vector(alpha) {
        return Err(Error::NotConvexVector);
    }
    let mut pairs = Vec::new();
    for (a, p) in alpha.iter().zip(ps) {
        for (x, w) in &p.weights {
            pairs.push((x.clone(), a.mul(w)));
        }
    }
    Ok(Distribution::accumulate(pairs))
}

impl<T: Ord + Clone + Debug> Distribution<T, Rational> {
    pub fn uniform<I: IntoIterator<Item = T>>(items: I) -> Result<Self> {
        let items: Vec<T> = items.into_iter().collect();
        if items.is_empty() {
            return Err(Error::InvalidDistribution("uniform over an empty set".into()));
        }
        let w = Rational::new(1.into(), (items.len() as i64).into());
        Self::new(items.into_iter().map(|x| (x, w.clone())))
    }

    /// Weighted sum with arbitrary rational coefficients; used for affine
    /// bookkeeping where intermediate results need not be normalized.
    pub(crate) fn scaled_pairs(&self, scale: &Rational) -> impl Iterator<Item = (T, Rational)> + '_ {
        let scale = scale.clone();
        self.weights.iter().map(move |(x, w)| (x.clone(), w * &scale))
    }
}

impl<T: Ord + Debug, S: Debug> Debug for Distribution<T, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.weights.iter()).finish()
    }
}

impl<T: Ord + Display, S: Semiring> Display for Distribution<T, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (x, w)) in self.weights.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}: {}", w.to_canonical())?;
        }
        write!(f, "}}")
    }
}

#[derive(Serialize, Deserialize)]
struct WeightEntry {
    el: String,
    w: String,
}

#[derive(Serialize, Deserialize)]
struct DistributionJson {
    weights: Vec<WeightEntry>,
}

impl<S: Semiring> Serialize for Distribution<String, S> {
    fn serialize<Ser: serde::Serializer>(&self, serializer: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        DistributionJson {
            weights: self
                .weights
                .iter()
                .map(|(el, w)| WeightEntry { el: el.clone(), w: w.to_canonical() })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de, S: Semiring> Deserialize<'de> for Distribution<String, S> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = DistributionJson::deserialize(deserializer)?;
        let mut pairs = Vec::with_capacity(raw.weights.len());
        for entry in raw.weights {
            let w = S::parse_canonical(&entry.w).map_err(D::Error::custom)?;
            pairs.push((entry.el, w));
        }
        Distribution::new(pairs).map_err(D::Error::custom)
    }
}

/// Convenience constructor for string-labelled rational distributions.
pub fn dist(pairs: &[(&str, Rational)]) -> Distribution {
    Distribution::new(pairs.iter().map(|(x, w)| (x.to_string(), w.clone())))
        .expect("literal distribution must be normalized")
}

/// Delta on a string label.
pub fn delta(x: &str) -> Distribution {
    Distribution::delta(x.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiring::q;

    #[test]
    fn delta_has_single_atom() {
        let d = delta("a");
        assert_eq!(d.support_size(), 1);
        assert_eq!(d.weight(&"a".to_string()), q(1, 1));
        assert_eq!(d.map(|x| x.clone()), d);
    }

    #[test]
    fn pushforward_collapses_and_swaps() {
        let p = dist(&[("a", q(1, 2)), ("c", q(1, 2))]);
        assert_eq!(p.map(|_| "b".to_string()), delta("b"));

        let p = dist(&[("a", q(1, 3)), ("b", q(2, 3))]);
        let swapped = p.map(|x| if x == "a" { "b".to_string() } else { "a".to_string() });
        assert_eq!(swapped, dist(&[("a", q(2, 3)), ("b", q(1, 3))]));
    }

    #[test]
    fn pushforward_reports_missing_support_element() {
        let p = dist(&[("a", q(1, 2)), ("b", q(1, 2))]);
        let err = p.pushforward(|x| (x == "a").then(|| "z".to_string())).unwrap_err();
        assert!(matches!(err, Error::UndefinedOnSupport(_)));
    }

    #[test]
    fn flatten_examples() {
        assert_eq!(Distribution::delta(delta("a")).flatten(), delta("a"));
        let half = dist(&[("a", q(1, 2)), ("b", q(1, 2))]);
        let nested = Distribution::new(vec![(half, q(1, 2)), (delta("a"), q(1, 2))]).unwrap();
        assert_eq!(nested.flatten(), dist(&[("a", q(3, 4)), ("b", q(1, 4))]));
    }

    #[test]
    fn convex_combine_examples() {
        let p = dist(&[("a", q(1, 2)), ("b", q(1, 2))]);
        assert_eq!(convex_combine(&[q(1, 1)], std::slice::from_ref(&p)).unwrap(), p);
        assert_eq!(
            convex_combine(&[q(1, 2), q(1, 2)], &[delta("a"), delta("b")]).unwrap(),
            dist(&[("a", q(1, 2)), ("b", q(1, 2))])
        );
        assert_eq!(
            convex_combine(&[q(1, 3), q(2, 3)], &[p, delta("b")]).unwrap(),
            dist(&[("a", q(1, 6)), ("b", q(5, 6))])
        );
        assert!(matches!(
            convex_combine(&[q(1, 3), q(1, 3)], &[delta("a"), delta("b")]),
            Err(Error::NotConvexVector)
        ));
    }

    #[test]
    fn rejects_unnormalized_and_negative_weights() {
        assert!(Distribution::new(vec![("a".to_string(), q(1, 2))]).is_err());
        assert!(Distribution::new(vec![("a".to_string(), q(3, 2)), ("b".to_string(), q(-1, 2))]).is_err());
    }

    #[test]
    fn boolean_flatten_is_union() {
        let s1: Distribution<&str, bool> = Distribution::new(vec![("a", true), ("b", true)]).unwrap();
        let s2: Distribution<&str, bool> = Distribution::new(vec![("c", true)]).unwrap();
        let nested = Distribution::new(vec![(s1, true), (s2, true)]).unwrap();
        let flat = nested.flatten();
        assert_eq!(flat.support().copied().collect::<Vec<_>>(), vec!["a", "b", "c"]);
    }

    #[test]
    fn json_round_trip() {
        let p = dist(&[("a", q(1, 3)), ("b", q(2, 3))]);
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, r#"{"weights":[{"el":"a","w":"1/3"},{"el":"b","w":"2/3"}]}"#);
        let back: Distribution = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
        let bad = r#"{"weights":[{"el":"a","w":"1/3"}]}"#;
        assert!(serde_json::from_str::<Distribution>(bad).is_err());
        let boolean: Distribution<String, bool> = serde_json::from_str(r#"{"weights":[{"el":"a","w":"1"}]}"#).unwrap();
        assert_eq!(boolean.support_size(), 1);
    }
}
