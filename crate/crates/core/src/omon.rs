//! Operad-indexed monoidal structures: trivial structures induced by a
//! symmetric monoidal base, lax functors into presented convex sets, the
//! `⋆_α` construction and the monoidal Grothendieck construction with its
//! convexity checks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::category::{convex_grothendieck, CSetFunctor, ConvexFibration, FiniteCategory, TotalMorphism, TotalObject};
use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::join::{tagged, Join};
use crate::presented::{ConvexMap, EqualityStatus, Presentation, PresentedElement};
use crate::prop::{check_permutation, compose_permutations, identity_permutation, qconv_compose, QConvOp};
use crate::semiring::{format_rational, parse_rational, q, qi};
use crate::tensor::{expand, extend_multiconvex, product, tensor, tuple_name, NConvexMapSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperadKind {
    Trivial,
    Assoc,
    Comm,
    #[serde(rename = "qconv")]
    QConv,
}

/// An operation of one of the supported operads.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Operation {
    /// The only operation of the trivial operad.
    Trivial,
    /// A word `x_{σ(0)} … x_{σ(n-1)}`.
    Assoc(Vec<usize>),
    Comm(usize),
    QConv(QConvOp),
}

impl Operation {
    pub fn kind(&self) -> OperadKind {
        match self {
            Operation::Trivial => OperadKind::Trivial,
            Operation::Assoc(_) => OperadKind::Assoc,
            Operation::Comm(_) => OperadKind::Comm,
            Operation::QConv(_) => OperadKind::QConv,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Operation::Trivial => 1,
            Operation::Assoc(p) => p.len(),
            Operation::Comm(n) => *n,
            Operation::QConv(op) => op.arity(),
        }
    }

    pub fn unit(kind: OperadKind) -> Operation {
        match kind {
            OperadKind::Trivial => Operation::Trivial,
            OperadKind::Assoc => Operation::Assoc(vec![0]),
            OperadKind::Comm => Operation::Comm(1),
            OperadKind::QConv => Operation::QConv(QConvOp::unit()),
        }
    }

    pub fn is_unit(&self) -> bool {
        *self == Operation::unit(self.kind())
    }

    /// Operadic composition `z ∘ (x_1, …, x_n)`.
    pub fn compose(&self, xs: &[Operation]) -> Result<Operation> {
        if xs.len() != self.arity() {
            return Err(Error::ArityMismatch { expected: self.arity(), found: xs.len() });
        }
        if xs.iter().any(|x| x.kind() != self.kind()) {
            return Err(Error::InvalidInput("operations from different operads".into()));
        }
        match self {
            Operation::Trivial => Ok(Operation::Trivial),
            Operation::Comm(_) => Ok(Operation::Comm(xs.iter().map(Operation::arity).sum())),
            Operation::QConv(z) => {
                let inner: Vec<QConvOp> = xs
                    .iter()
                    .map(|x| match x {
                        Operation::QConv(op) => op.clone(),
                        _ => unreachable!("kinds checked"),
                    })
                    .collect();
                Ok(Operation::QConv(qconv_compose(z, &inner)?))
            }
            Operation::Assoc(sigma) => {
                let mut offsets = Vec::with_capacity(xs.len());
                let mut acc = 0;
                for x in xs {
                    offsets.push(acc);
                    acc += x.arity();
                }
                let mut word = Vec::with_capacity(acc);
                for &b in sigma {
                    let Operation::Assoc(tau) = &xs[b] else { unreachable!("kinds checked") };
                    word.extend(tau.iter().map(|t| offsets[b] + t));
                }
                Ok(Operation::Assoc(word))
            }
        }
    }

    /// Right action of a permutation, matching `⊗_z(y) ≅ ⊗_{z·σ}(y∘σ)`.
    pub fn act(&self, sigma: &[usize]) -> Result<Operation> {
        check_permutation(sigma, self.arity())?;
        match self {
            Operation::Trivial | Operation::Comm(_) => Ok(self.clone()),
            Operation::QConv(op) => Ok(Operation::QConv(op.permute(sigma)?)),
            Operation::Assoc(word) => {
                let mut inv = vec![0; sigma.len()];
                for (i, &s) in sigma.iter().enumerate() {
                    inv[s] = i;
                }
                Ok(Operation::Assoc(word.iter().map(|&v| inv[v]).collect()))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Operation::Trivial => "unit".into(),
            Operation::Assoc(p) => format!("assoc{p:?}"),
            Operation::Comm(n) => format!("comm({n})"),
            Operation::QConv(op) => {
                format!("qconv({})", op.weights().iter().map(format_rational).collect::<Vec<_>>().join(","))
            }
        }
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// All permutations of `0..n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn go(n: usize, current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if current.len() == n {
            out.push(current.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                current.push(i);
                go(n, current, used, out);
                current.pop();
                used[i] = false;
            }
        }
    }
    go(n, &mut current, &mut used, &mut out);
    out
}

/// Convex vectors of arity `1..=max_arity` whose entries have denominators
/// dividing some `d ≤ max_den`.
pub fn qconv_grid(max_den: usize, max_arity: usize) -> Vec<QConvOp> {
    fn parts(total: usize, n: usize) -> Vec<Vec<usize>> {
        if n == 1 {
            return vec![vec![total]];
        }
        (0..=total)
            .flat_map(|k| {
                parts(total - k, n - 1).into_iter().map(move |mut rest| {
                    rest.insert(0, k);
                    rest
                })
            })
            .collect()
    }
    let mut grid = BTreeSet::new();
    for n in 1..=max_arity {
        for d in 1..=max_den {
            for ks in parts(d, n) {
                let w = ks.iter().map(|&k| q(k as i64, d as i64)).collect();
                grid.insert(QConvOp::new(w).expect("grid point is convex"));
            }
        }
    }
    grid.into_iter().collect()
}

/// A strictly associative and unital symmetric monoidal structure on a
/// finite category. Partial tensors are allowed: bases may refuse tuples
/// whose product leaves the finite range.
pub trait SymmetricMonoidalBase: Send + Sync + fmt::Debug {
    fn category(&self) -> &Arc<FiniteCategory>;
    fn tensor(&self, objs: &[String]) -> Result<String>;
    fn tensor_morphisms(&self, mors: &[String]) -> Result<String>;
    /// The symmetry `⊗(y_1, …, y_n) → ⊗(y_σ(1), …, y_σ(n))`.
    fn symmetry(&self, objs: &[String], sigma: &[usize]) -> Result<String>;
}

/// Finite sets `{0, …, n-1}` for `n ≤ max` under disjoint union.
#[derive(Debug)]
pub struct FinCoproduct {
    max: usize,
    category: Arc<FiniteCategory>,
}

impl FinCoproduct {
    pub fn new(max: usize) -> Self {
        let sizes: Vec<usize> = (0..=max).collect();
        let mut morphisms = Vec::new();
        let mut functions: Vec<(usize, usize, Vec<usize>)> = Vec::new();
        for &a in &sizes {
            for &b in &sizes {
                for values in product(&vec![(0..b).collect::<Vec<_>>(); a]) {
                    let name = Self::map_name(a, b, &values);
                    if !name.starts_with("id_") {
                        morphisms.push(crate::category::Morphism { id: name, src: a.to_string(), tgt: b.to_string() });
                    }
                    functions.push((a, b, values));
                }
            }
        }
        let mut compose = Vec::new();
        for (a, b, f) in &functions {
            for (b2, c, g) in &functions {
                if b == b2 {
                    let gf: Vec<usize> = f.iter().map(|&x| g[x]).collect();
                    compose.push((Self::map_name(*b, *c, g), Self::map_name(*a, *b, f), Self::map_name(*a, *c, &gf)));
                }
            }
        }
        let objects = sizes.iter().map(usize::to_string).collect();
        let category = FiniteCategory::new(objects, morphisms, None, compose).expect("finite sets form a category");
        FinCoproduct { max, category: Arc::new(category) }
    }

    pub fn max(&self) -> usize {
        self.max
    }

    /// Name of the function `a → b` with the given values.
    pub fn map_name(a: usize, b: usize, values: &[usize]) -> String {
        if a == b && values.iter().enumerate().all(|(i, &v)| i == v) {
            return format!("id_{a}");
        }
        let vs: Vec<String> = values.iter().map(usize::to_string).collect();
        format!("{a}->{b}:{}", vs.join(","))
    }

    pub fn parse_map(&self, name: &str) -> Option<(usize, usize, Vec<usize>)> {
        if let Some(a) = name.strip_prefix("id_") {
            let a: usize = a.parse().ok()?;
            return Some((a, a, (0..a).collect()));
        }
        let (types, values) = name.split_once(':')?;
        let (a, b) = types.split_once("->")?;
        let values: Vec<usize> =
            if values.is_empty() { Vec::new() } else { values.split(',').map(str::parse).collect::<std::result::Result<_, _>>().ok()? };
        Some((a.parse().ok()?, b.parse().ok()?, values))
    }

    fn size(&self, obj: &str) -> Result<usize> {
        obj.parse().ok().filter(|&n| n <= self.max).ok_or_else(|| Error::InvalidInput(format!("unknown object {obj}")))
    }

    fn checked_sum(&self, sizes: &[usize]) -> Result<usize> {
        let total: usize = sizes.iter().sum();
        if total > self.max {
            return Err(Error::InvalidInput(format!("coproduct of size {total} exceeds {}", self.max)));
        }
        Ok(total)
    }
}

impl SymmetricMonoidalBase for FinCoproduct {
    fn category(&self) -> &Arc<FiniteCategory> {
        &self.category
    }

    fn tensor(&self, objs: &[String]) -> Result<String> {
        let sizes = objs.iter().map(|o| self.size(o)).collect::<Result<Vec<_>>>()?;
        Ok(self.checked_sum(&sizes)?.to_string())
    }

    fn tensor_morphisms(&self, mors: &[String]) -> Result<String> {
        let parsed = mors
            .iter()
            .map(|m| self.parse_map(m).ok_or_else(|| Error::InvalidInput(format!("unknown morphism {m}"))))
            .collect::<Result<Vec<_>>>()?;
        let a = self.checked_sum(&parsed.iter().map(|p| p.0).collect::<Vec<_>>())?;
        let b = self.checked_sum(&parsed.iter().map(|p| p.1).collect::<Vec<_>>())?;
        let mut values = Vec::with_capacity(a);
        let mut offset = 0;
        for (_, tgt, vs) in &parsed {
            values.extend(vs.iter().map(|v| v + offset));
            offset += tgt;
        }
        Ok(Self::map_name(a, b, &values))
    }

    fn symmetry(&self, objs: &[String], sigma: &[usize]) -> Result<String> {
        check_permutation(sigma, objs.len())?;
        let sizes = objs.iter().map(|o| self.size(o)).collect::<Result<Vec<_>>>()?;
        let total = self.checked_sum(&sizes)?;
        let offsets = |s: &[usize]| {
            s.iter()
                .scan(0, |acc, &n| {
                    let o = *acc;
                    *acc += n;
                    Some(o)
                })
                .collect::<Vec<_>>()
        };
        let permuted: Vec<usize> = sigma.iter().map(|&i| sizes[i]).collect();
        let (from, to) = (offsets(&sizes), offsets(&permuted));
        let mut inv = vec![0; sigma.len()];
        for (i, &s) in sigma.iter().enumerate() {
            inv[s] = i;
        }
        let mut values = vec![0; total];
        for (k, &n) in sizes.iter().enumerate() {
            for g in 0..n {
                values[from[k] + g] = to[inv[k]] + g;
            }
        }
        Ok(Self::map_name(total, total, &values))
    }
}

/// The chain `0 ≤ 1 ≤ … ≤ n-1` with `max` as tensor.
#[derive(Debug)]
pub struct MaxOrder {
    category: Arc<FiniteCategory>,
}

impl MaxOrder {
    pub fn new(n: usize) -> Self {
        let rel = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        MaxOrder { category: Arc::new(FiniteCategory::preorder(n, &rel).expect("a chain is a preorder")) }
    }

    fn level(&self, obj: &str) -> Result<usize> {
        obj.parse()
            .ok()
            .filter(|_| self.category.objects().iter().any(|o| o == obj))
            .ok_or_else(|| Error::InvalidInput(format!("unknown object {obj}")))
    }

    fn arrow(i: usize, j: usize) -> String {
        if i == j {
            format!("id_{i}")
        } else {
            format!("{i}<={j}")
        }
    }
}

impl SymmetricMonoidalBase for MaxOrder {
    fn category(&self) -> &Arc<FiniteCategory> {
        &self.category
    }

    fn tensor(&self, objs: &[String]) -> Result<String> {
        let levels = objs.iter().map(|o| self.level(o)).collect::<Result<Vec<_>>>()?;
        levels.into_iter().max().map(|m| m.to_string()).ok_or(Error::EmptyFactorList)
    }

    fn tensor_morphisms(&self, mors: &[String]) -> Result<String> {
        let mut src = Vec::new();
        let mut tgt = Vec::new();
        for m in mors {
            let mm = self.category.morphism(m).ok_or_else(|| Error::InvalidInput(format!("unknown morphism {m}")))?;
            src.push(mm.src.clone());
            tgt.push(mm.tgt.clone());
        }
        Ok(Self::arrow(self.tensor(&src)?.parse().expect("level"), self.tensor(&tgt)?.parse().expect("level")))
    }

    fn symmetry(&self, objs: &[String], sigma: &[usize]) -> Result<String> {
        check_permutation(sigma, objs.len())?;
        Ok(format!("id_{}", self.tensor(objs)?))
    }
}

/// A single object whose tensor is itself.
#[derive(Debug)]
pub struct PointBase {
    category: Arc<FiniteCategory>,
}

impl PointBase {
    pub fn new() -> Self {
        PointBase { category: Arc::new(FiniteCategory::discrete(1)) }
    }
}

impl Default for PointBase {
    fn default() -> Self {
        Self::new()
    }
}

impl SymmetricMonoidalBase for PointBase {
    fn category(&self) -> &Arc<FiniteCategory> {
        &self.category
    }

    fn tensor(&self, objs: &[String]) -> Result<String> {
        if objs.is_empty() || objs.iter().any(|o| o != "0") {
            return Err(Error::InvalidInput("the point base has the single object 0".into()));
        }
        Ok("0".into())
    }

    fn tensor_morphisms(&self, mors: &[String]) -> Result<String> {
        if mors.is_empty() || mors.iter().any(|m| m != "id_0") {
            return Err(Error::InvalidInput("the point base has the single morphism id_0".into()));
        }
        Ok("id_0".into())
    }

    fn symmetry(&self, objs: &[String], sigma: &[usize]) -> Result<String> {
        check_permutation(sigma, objs.len())?;
        self.tensor(objs)?;
        Ok("id_0".into())
    }
}

/// An operad-indexed monoidal category whose operations all act by the
/// underlying symmetric tensor.
#[derive(Clone, Debug)]
pub struct OMonCategory {
    base: Arc<dyn SymmetricMonoidalBase>,
    kind: OperadKind,
}

/// Object tuples of arity `1..=max_arity` on which the tensor is defined.
fn object_tuples(base: &dyn SymmetricMonoidalBase, max_arity: usize) -> Vec<Vec<String>> {
    let objs = base.category().objects().to_vec();
    (1..=max_arity).flat_map(|n| product(&vec![objs.clone(); n])).filter(|t| base.tensor(t).is_ok()).collect()
}

/// Validates the symmetric structure on samples (tuples up to arity 3,
/// naturality up to arity 2) and wraps it as a parameter-blind structure.
pub fn trivial_structure(base: Arc<dyn SymmetricMonoidalBase>, kind: OperadKind) -> Result<OMonCategory> {
    let fail = |msg: String| Error::CoherenceFailure(msg);
    let cat = base.category().clone();
    for objs in object_tuples(&*base, 3) {
        let n = objs.len();
        let t = base.tensor(&objs)?;
        for sigma in all_permutations(n) {
            let s = base.symmetry(&objs, &sigma)?;
            let permuted: Vec<String> = sigma.iter().map(|&i| objs[i].clone()).collect();
            let m = cat.morphism(&s).ok_or_else(|| fail(format!("symmetry {s} is not a morphism")))?;
            if m.src != t || m.tgt != base.tensor(&permuted)? {
                return Err(fail(format!("symmetry for {objs:?} has the wrong type")));
            }
            if sigma == identity_permutation(n) && !cat.is_identity(&s) {
                return Err(fail(format!("trivial symmetry on {objs:?} is not an identity")));
            }
            for tau in all_permutations(n) {
                let second = base.symmetry(&permuted, &tau)?;
                let composite = cat.compose(&second, &s).expect("composable");
                if composite != base.symmetry(&objs, &compose_permutations(&sigma, &tau))? {
                    return Err(fail(format!("symmetries on {objs:?} do not compose")));
                }
            }
        }
    }
    for objs in object_tuples(&*base, 2) {
        let choices: Vec<Vec<String>> = objs
            .iter()
            .map(|o| cat.morphisms().filter(|m| &m.src == o).map(|m| m.id.clone()).collect())
            .collect();
        for mors in product(&choices) {
            let Ok(fm) = base.tensor_morphisms(&mors) else { continue };
            let targets: Vec<String> = mors.iter().map(|m| cat.morphism(m).expect("known").tgt.clone()).collect();
            for sigma in all_permutations(objs.len()) {
                let permuted_mors: Vec<String> = sigma.iter().map(|&i| mors[i].clone()).collect();
                let left = cat.compose(&base.symmetry(&targets, &sigma)?, &fm).map(String::from);
                let right = cat.compose(&base.tensor_morphisms(&permuted_mors)?, &base.symmetry(&objs, &sigma)?).map(String::from);
                if left.is_none() || left != right {
                    return Err(fail(format!("symmetry is not natural at {mors:?}")));
                }
            }
        }
    }
    Ok(OMonCategory { base, kind })
}

impl OMonCategory {
    pub fn kind(&self) -> OperadKind {
        self.kind
    }

    pub fn base(&self) -> &Arc<dyn SymmetricMonoidalBase> {
        &self.base
    }

    pub fn category(&self) -> &Arc<FiniteCategory> {
        self.base.category()
    }

    fn check_operation(&self, z: &Operation, n: usize) -> Result<()> {
        if z.kind() != self.kind {
            return Err(Error::InvalidInput(format!("{z} is not an operation of {:?}", self.kind)));
        }
        if z.arity() != n {
            return Err(Error::ArityMismatch { expected: z.arity(), found: n });
        }
        Ok(())
    }

    pub fn tensor_objects(&self, z: &Operation, objs: &[String]) -> Result<String> {
        self.check_operation(z, objs.len())?;
        self.base.tensor(objs)
    }

    pub fn tensor_morphisms(&self, z: &Operation, mors: &[String]) -> Result<String> {
        self.check_operation(z, mors.len())?;
        self.base.tensor_morphisms(mors)
    }

    /// `φ: ⊗_z(⊗_{x_1}(…), …) → ⊗_{z∘x}(…)`; an identity since the base is strict.
    pub fn composition_iso(&self, z: &Operation, xs: &[Operation], flat: &[String]) -> Result<String> {
        let blocks = split_blocks(flat, xs)?;
        let inner = blocks.iter().zip(xs).map(|(b, x)| self.tensor_objects(x, b)).collect::<Result<Vec<_>>>()?;
        let nested = self.tensor_objects(z, &inner)?;
        let direct = self.tensor_objects(&z.compose(xs)?, flat)?;
        if nested != direct {
            return Err(Error::CoherenceFailure(format!("{nested} and {direct} differ")));
        }
        Ok(self.category().identity(&direct).to_string())
    }

    /// `φ^σ: ⊗_z(y) → ⊗_{z·σ}(y∘σ)`.
    pub fn symmetry_iso(&self, z: &Operation, sigma: &[usize], objs: &[String]) -> Result<String> {
        self.check_operation(z, objs.len())?;
        self.base.symmetry(objs, sigma)
    }
}

fn split_blocks<T: Clone>(flat: &[T], xs: &[Operation]) -> Result<Vec<Vec<T>>> {
    let total: usize = xs.iter().map(Operation::arity).sum();
    if total != flat.len() {
        return Err(Error::ArityMismatch { expected: total, found: flat.len() });
    }
    let mut out = Vec::with_capacity(xs.len());
    let mut start = 0;
    for x in xs {
        out.push(flat[start..start + x.arity()].to_vec());
        start += x.arity();
    }
    Ok(out)
}

/// Structure maps `ξ^z_{i_1…i_n}` given as multiconvex tables.
pub type XiFn = dyn Fn(&Operation, &[String]) -> Result<NConvexMapSpec> + Send + Sync;

/// A lax functor into presented convex sets with the tensor.
#[derive(Clone)]
pub struct LaxFunctor {
    category: Arc<OMonCategory>,
    underlying: CSetFunctor,
    xi: Arc<XiFn>,
}

impl fmt::Debug for LaxFunctor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LaxFunctor").field("category", &self.category).field("underlying", &self.underlying).finish()
    }
}

impl LaxFunctor {
    pub fn new(category: Arc<OMonCategory>, underlying: CSetFunctor, xi: Arc<XiFn>) -> Result<Self> {
        if **underlying.category() != **category.category() {
            return Err(Error::NotAFunctor("functor and monoidal structure have different bases".into()));
        }
        Ok(LaxFunctor { category, underlying, xi })
    }

    pub fn category(&self) -> &Arc<OMonCategory> {
        &self.category
    }

    pub fn underlying(&self) -> &CSetFunctor {
        &self.underlying
    }

    /// The table of `ξ^z` at `objs`, checked against the expected signature.
    pub fn xi(&self, z: &Operation, objs: &[String]) -> Result<NConvexMapSpec> {
        let target = self.category.tensor_objects(z, objs)?;
        let spec = (self.xi)(z, objs)?;
        let factors_ok = spec.factors.len() == objs.len()
            && spec.factors.iter().zip(objs).all(|(f, o)| **f == **self.underlying.object(o));
        if !factors_ok || *spec.target != **self.underlying.object(&target) {
            return Err(Error::NotLax(format!("ξ at {z} on {objs:?} has the wrong signature")));
        }
        Ok(spec)
    }

    /// `ξ^z` as a convex map out of the tensor.
    pub fn xi_map(&self, z: &Operation, objs: &[String], bound: usize) -> Result<ConvexMap> {
        let spec = self.xi(z, objs)?;
        extend_multiconvex(&spec, bound).map_err(|e| Error::NotConvexStructureMap(format!("ξ at {z} on {objs:?}: {e}")))
    }

    /// Evaluates `ξ^z` on a tuple of representatives (pure tensor).
    pub fn apply_xi(&self, z: &Operation, objs: &[String], reps: &[&Distribution], bound: usize) -> Result<Distribution> {
        self.xi_map(z, objs, bound)?.apply_rep(&expand(reps))
    }

    /// A copy with one table entry replaced.
    pub fn with_override(&self, z: &Operation, objs: &[String], tuple: &[String], value: Distribution) -> Self {
        let inner = self.xi.clone();
        let (z0, objs0, tuple0) = (z.clone(), objs.to_vec(), tuple.to_vec());
        let xi: Arc<XiFn> = Arc::new(move |z: &Operation, objs: &[String]| {
            let mut spec = inner(z, objs)?;
            if *z == z0 && objs == objs0.as_slice() {
                spec.table.insert(tuple0.clone(), value.clone());
            }
            Ok(spec)
        });
        LaxFunctor { category: self.category.clone(), underlying: self.underlying.clone(), xi }
    }
}

fn free_numbered(n: usize) -> Arc<Presentation> {
    Arc::new(Presentation::free((0..n).map(|i| i.to_string())).expect("distinct generators"))
}

/// The distributions functor on finite sets with
/// `ξ_α(p_1, …, p_n) = Σ α_i p_i` on the disjoint union.
pub fn dist_lax_functor(base: Arc<FinCoproduct>) -> Result<LaxFunctor> {
    let category = Arc::new(trivial_structure(base.clone(), OperadKind::QConv)?);
    let cat = base.category().clone();
    let objects: BTreeMap<String, Arc<Presentation>> =
        (0..=base.max()).map(|n| (n.to_string(), free_numbered(n))).collect();
    let mut morphisms = BTreeMap::new();
    for m in cat.morphisms() {
        let (a, b, values) = base.parse_map(&m.id).expect("own morphism names parse");
        let images = (0..a).map(|g| (g.to_string(), Distribution::delta(values[g].to_string()))).collect();
        morphisms.insert(m.id.clone(), ConvexMap::from_images_unchecked(objects[&a.to_string()].clone(), objects[&b.to_string()].clone(), images)?);
    }
    let underlying = CSetFunctor::new(cat, objects.clone(), morphisms, 0)?;
    let xi: Arc<XiFn> = Arc::new(move |z: &Operation, objs: &[String]| {
        let Operation::QConv(alpha) = z else {
            return Err(Error::NotLax(format!("{z} is not a convex vector")));
        };
        let sizes: Vec<usize> = objs.iter().map(|o| o.parse().map_err(|_| Error::InvalidInput(o.clone()))).collect::<Result<_>>()?;
        let total = base.checked_sum(&sizes)?;
        let factors: Vec<Arc<Presentation>> = objs.iter().map(|o| objects[o].clone()).collect();
        let lists: Vec<Vec<String>> = factors.iter().map(|f| f.generators().to_vec()).collect();
        let mut table = BTreeMap::new();
        for t in product(&lists) {
            let mut offset = 0;
            let mut pairs = Vec::new();
            for ((g, w), n) in t.iter().zip(alpha.weights()).zip(&sizes) {
                pairs.push(((offset + g.parse::<usize>().expect("numbered")).to_string(), w.clone()));
                offset += n;
            }
            table.insert(t, Distribution::new(pairs)?);
        }
        NConvexMapSpec::new(factors, objects[&total.to_string()].clone(), table)
    });
    LaxFunctor::new(category, underlying, xi)
}

/// `i ↦ D({0, …, i})` on a chain with `ξ(g_1, …, g_n) = δ_{max g}`,
/// for any operad (the structure ignores the parameter).
pub fn max_lax_functor(base: Arc<MaxOrder>, kind: OperadKind) -> Result<LaxFunctor> {
    let category = Arc::new(trivial_structure(base.clone(), kind)?);
    let cat = base.category().clone();
    let objects: BTreeMap<String, Arc<Presentation>> =
        cat.objects().iter().map(|o| (o.clone(), free_numbered(o.parse::<usize>().expect("level") + 1))).collect();
    let mut morphisms = BTreeMap::new();
    for m in cat.morphisms() {
        let src = &objects[&m.src];
        let images = src.generators().iter().map(|g| (g.clone(), Distribution::delta(g.clone()))).collect();
        morphisms.insert(m.id.clone(), ConvexMap::from_images_unchecked(src.clone(), objects[&m.tgt].clone(), images)?);
    }
    let underlying = CSetFunctor::new(cat, objects.clone(), morphisms, 0)?;
    let xi: Arc<XiFn> = Arc::new(move |_z: &Operation, objs: &[String]| {
        let target = base.tensor(objs)?;
        let factors: Vec<Arc<Presentation>> = objs.iter().map(|o| objects[o].clone()).collect();
        let lists: Vec<Vec<String>> = factors.iter().map(|f| f.generators().to_vec()).collect();
        let table = product(&lists)
            .into_iter()
            .map(|t| {
                let m = t.iter().map(|g| g.parse::<usize>().expect("numbered")).max().expect("nonempty tuple");
                (t, Distribution::delta(m.to_string()))
            })
            .collect();
        NConvexMapSpec::new(factors, objects[&target].clone(), table)
    });
    LaxFunctor::new(category, underlying, xi)
}

/// One convex set over the point with the trivial operad: `ξ^u = id`.
pub fn constant_lax_functor(pres: &Arc<Presentation>) -> Result<LaxFunctor> {
    let base = Arc::new(PointBase::new());
    let category = Arc::new(trivial_structure(base.clone(), OperadKind::Trivial)?);
    let underlying = CSetFunctor::constant(base.category(), pres);
    let p = pres.clone();
    let xi: Arc<XiFn> = Arc::new(move |_z: &Operation, objs: &[String]| {
        let table = p.generators().iter().map(|g| (vec![g.clone()], Distribution::delta(g.clone()))).collect();
        NConvexMapSpec::new(vec![p.clone(); objs.len()], p.clone(), table)
    });
    LaxFunctor::new(category, underlying, xi)
}

/// One operation applied to objects, with optional morphisms out of them
/// (for naturality) or inner operations (for the composition square, in
/// which case `objects` is the flattened list).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub operation: Operation,
    pub objects: Vec<String>,
    pub morphisms: Vec<String>,
    pub inner: Vec<Operation>,
}

#[derive(Serialize, Deserialize)]
struct OperationJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kind: Option<OperadKind>,
    arity: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    permutation: Option<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    operation: OperationJson,
    objects: Vec<String>,
    #[serde(default)]
    morphisms: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    inner: Vec<OperationJson>,
}

impl OperationJson {
    fn parse(self) -> Result<Operation> {
        let kind = self.kind.unwrap_or(if self.alpha.is_some() { OperadKind::QConv } else { OperadKind::Comm });
        let op = match kind {
            OperadKind::Trivial => Operation::Trivial,
            OperadKind::Comm => Operation::Comm(self.arity),
            OperadKind::Assoc => {
                let p = self.permutation.unwrap_or_else(|| identity_permutation(self.arity));
                check_permutation(&p, self.arity)?;
                Operation::Assoc(p)
            }
            OperadKind::QConv => {
                let alpha = self.alpha.ok_or_else(|| Error::InvalidInput("convex operation needs alpha".into()))?;
                Operation::QConv(QConvOp::new(alpha.iter().map(|a| parse_rational(a)).collect::<Result<_>>()?)?)
            }
        };
        if op.arity() != self.arity {
            return Err(Error::ArityMismatch { expected: self.arity, found: op.arity() });
        }
        Ok(op)
    }

    fn from_op(op: &Operation) -> Self {
        let mut out = OperationJson { kind: Some(op.kind()), arity: op.arity(), alpha: None, permutation: None };
        match op {
            Operation::QConv(a) => out.alpha = Some(a.weights().iter().map(format_rational).collect()),
            Operation::Assoc(p) => out.permutation = Some(p.clone()),
            _ => {}
        }
        out
    }
}

impl Instance {
    pub fn new(operation: Operation, objects: Vec<String>) -> Self {
        Instance { operation, objects, morphisms: Vec::new(), inner: Vec::new() }
    }

    pub fn from_json(text: &str) -> Result<Vec<Self>> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let raws: Vec<InstanceJson> = if value.is_array() { serde_json::from_value(value)? } else { vec![serde_json::from_value(value)?] };
        raws.into_iter()
            .map(|r| {
                Ok(Instance {
                    operation: r.operation.parse()?,
                    objects: r.objects,
                    morphisms: r.morphisms,
                    inner: r.inner.into_iter().map(OperationJson::parse).collect::<Result<_>>()?,
                })
            })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let raw = InstanceJson {
            operation: OperationJson::from_op(&self.operation),
            objects: self.objects.clone(),
            morphisms: self.morphisms.clone(),
            inner: self.inner.iter().map(OperationJson::from_op).collect(),
        };
        serde_json::to_value(raw).expect("instance serializes")
    }

    pub fn key(&self) -> String {
        let mut key = format!("{} on {:?}", self.operation, self.objects);
        if !self.inner.is_empty() {
            key.push_str(&format!(" after {:?}", self.inner.iter().map(Operation::label).collect::<Vec<_>>()));
        }
        if !self.morphisms.is_empty() {
            key.push_str(&format!(" along {:?}", self.morphisms));
        }
        key
    }
}

/// Instances for every operation in `ops` and every object tuple with a
/// defined tensor, plus one naturality instance per non-identity morphism
/// choice in a single slot.
pub fn sample_instances(category: &OMonCategory, ops: &[Operation]) -> Vec<Instance> {
    let cat = category.category();
    let mut out = Vec::new();
    for z in ops {
        let n = z.arity();
        for objs in product(&vec![cat.objects().to_vec(); n]) {
            if category.tensor_objects(z, &objs).is_err() {
                continue;
            }
            out.push(Instance::new(z.clone(), objs.clone()));
            for k in 0..n {
                let Some(f) = cat.morphisms().find(|m| m.src == objs[k] && !cat.is_identity(&m.id)) else { continue };
                let mut mors: Vec<String> = objs.iter().map(|o| cat.identity(o).to_string()).collect();
                mors[k] = f.id.clone();
                if category.tensor_morphisms(z, &mors).is_ok() {
                    out.push(Instance { morphisms: mors, ..Instance::new(z.clone(), objs.clone()) });
                }
            }
        }
    }
    out.sort_by_key(Instance::key);
    out
}

/// Composition-square instances `z ∘ (x_1, …, x_n)` over all flat object
/// tuples with a defined tensor.
pub fn composite_instances(category: &OMonCategory, outer: &[Operation], inner: &[Operation]) -> Vec<Instance> {
    let cat = category.category();
    let mut out = Vec::new();
    for z in outer {
        for xs in product(&vec![inner.to_vec(); z.arity()]) {
            let total: usize = xs.iter().map(Operation::arity).sum();
            for flat in product(&vec![cat.objects().to_vec(); total]) {
                if category.composition_iso(z, &xs, &flat).is_ok() {
                    out.push(Instance { operation: z.clone(), objects: flat, morphisms: Vec::new(), inner: xs.clone() });
                }
            }
        }
    }
    out.sort_by_key(Instance::key);
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LaxEntry {
    pub instance: String,
    pub check: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LaxReport {
    pub entries: Vec<LaxEntry>,
}

impl LaxReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &LaxEntry> {
        self.entries.iter().filter(|e| !e.passed)
    }

    fn push(&mut self, instance: &Instance, check: &str, outcome: Result<()>) {
        let detail = outcome.err().map(|e| e.to_string());
        self.entries.push(LaxEntry { instance: instance.key(), check: check.into(), passed: detail.is_none(), detail });
    }
}

fn same_in(pres: &Presentation, a: &Distribution, b: &Distribution, bound: usize) -> Result<()> {
    match pres.decide(a, b, bound)?.status() {
        EqualityStatus::Equal => Ok(()),
        EqualityStatus::Distinct => Err(Error::NotLax(format!("{a} and {b} differ"))),
        EqualityStatus::Unknown => Err(Error::NotLax(format!("{a} and {b} undecided within {bound} steps"))),
    }
}

fn generator_tuples(f: &LaxFunctor, objs: &[String]) -> Vec<Vec<String>> {
    let lists: Vec<Vec<String>> = objs.iter().map(|o| f.underlying.object(o).generators().to_vec()).collect();
    product(&lists)
}

fn deltas(t: &[String]) -> Vec<Distribution> {
    t.iter().map(|g| Distribution::delta(g.clone())).collect()
}

fn check_unit(f: &LaxFunctor, obj: &str) -> Result<()> {
    let u = Operation::unit(f.category.kind());
    let spec = f.xi(&u, &[obj.to_string()])?;
    for (t, v) in &spec.table {
        if v.is_delta() != Some(&t[0]) {
            return Err(Error::NotLax(format!("ξ at the unit sends {} to {v}", t[0])));
        }
    }
    Ok(())
}

fn check_symmetry(f: &LaxFunctor, z: &Operation, objs: &[String], sigma: &[usize], bound: usize) -> Result<()> {
    let cat = &f.category;
    let phi = cat.symmetry_iso(z, sigma, objs)?;
    let zs = z.act(sigma)?;
    let permuted: Vec<String> = sigma.iter().map(|&i| objs[i].clone()).collect();
    let target = f.underlying.object(&cat.tensor_objects(&zs, &permuted)?).clone();
    let f_phi = f.underlying.morphism(&phi);
    let here = f.xi_map(z, objs, bound)?;
    let there = f.xi_map(&zs, &permuted, bound)?;
    for t in generator_tuples(f, objs) {
        let a = f_phi.apply_rep(&here.apply_rep(&expand(&deltas(&t).iter().collect::<Vec<_>>()))?)?;
        let h: Vec<String> = sigma.iter().map(|&i| t[i].clone()).collect();
        let b = there.apply_rep(&expand(&deltas(&h).iter().collect::<Vec<_>>()))?;
        same_in(&target, &a, &b, bound).map_err(|e| Error::NotLax(format!("σ = {sigma:?} at {t:?}: {e}")))?;
    }
    Ok(())
}

fn check_naturality(f: &LaxFunctor, z: &Operation, objs: &[String], mors: &[String], bound: usize) -> Result<()> {
    let cat = f.category.category();
    if mors.len() != objs.len() {
        return Err(Error::ArityMismatch { expected: objs.len(), found: mors.len() });
    }
    let mut targets = Vec::new();
    for (m, o) in mors.iter().zip(objs) {
        let mm = cat.morphism(m).ok_or_else(|| Error::InvalidInput(format!("unknown morphism {m}")))?;
        if &mm.src != o {
            return Err(Error::InvalidInput(format!("{m} does not start at {o}")));
        }
        targets.push(mm.tgt.clone());
    }
    let fm = f.underlying.morphism(&f.category.tensor_morphisms(z, mors)?).clone();
    let pres = f.underlying.object(&f.category.tensor_objects(z, &targets)?).clone();
    let before = f.xi_map(z, objs, bound)?;
    let after = f.xi_map(z, &targets, bound)?;
    for t in generator_tuples(f, objs) {
        let a = fm.apply_rep(&before.apply_rep(&expand(&deltas(&t).iter().collect::<Vec<_>>()))?)?;
        let images: Vec<Distribution> =
            t.iter().zip(mors).map(|(g, m)| f.underlying.morphism(m).image(g).expect("total").clone()).collect();
        let b = after.apply_rep(&expand(&images.iter().collect::<Vec<_>>()))?;
        same_in(&pres, &a, &b, bound).map_err(|e| Error::NotLax(format!("at {t:?}: {e}")))?;
    }
    Ok(())
}

fn check_composition(f: &LaxFunctor, z: &Operation, xs: &[Operation], flat: &[String], bound: usize) -> Result<()> {
    let cat = &f.category;
    let phi = f.underlying.morphism(&cat.composition_iso(z, xs, flat)?).clone();
    let zx = z.compose(xs)?;
    let pres = f.underlying.object(&cat.tensor_objects(&zx, flat)?).clone();
    let blocks = split_blocks(flat, xs)?;
    let inner_objs = blocks.iter().zip(xs).map(|(b, x)| cat.tensor_objects(x, b)).collect::<Result<Vec<_>>>()?;
    let direct = f.xi_map(&zx, flat, bound)?;
    let outer = f.xi_map(z, &inner_objs, bound)?;
    let inner_maps = blocks.iter().zip(xs).map(|(b, x)| f.xi_map(x, b, bound)).collect::<Result<Vec<_>>>()?;
    for t in generator_tuples(f, flat) {
        let a = phi.apply_rep(&direct.apply_rep(&expand(&deltas(&t).iter().collect::<Vec<_>>()))?)?;
        let parts = split_blocks(&t, xs)?
            .iter()
            .zip(&inner_maps)
            .map(|(tb, m)| m.apply_rep(&expand(&deltas(tb).iter().collect::<Vec<_>>())))
            .collect::<Result<Vec<_>>>()?;
        let b = outer.apply_rep(&expand(&parts.iter().collect::<Vec<_>>()))?;
        same_in(&pres, &a, &b, bound).map_err(|e| Error::NotLax(format!("at {t:?}: {e}")))?;
    }
    Ok(())
}

/// Checks the unit condition and the compatibility squares on each
/// instance. Failures are reported per instance, never raised.
pub fn check_lax(f: &LaxFunctor, instances: &[Instance], bound: usize) -> LaxReport {
    let mut report = LaxReport::default();
    let mut sorted: Vec<&Instance> = instances.iter().collect();
    sorted.sort_by_key(|i| i.key());
    for inst in sorted {
        let z = &inst.operation;
        if !inst.inner.is_empty() {
            report.push(inst, "composition", check_composition(f, z, &inst.inner, &inst.objects, bound));
            continue;
        }
        for o in &inst.objects {
            report.push(inst, &format!("unit at {o}"), check_unit(f, o));
        }
        report.push(inst, "signature", f.xi_map(z, &inst.objects, bound).map(|_| ()));
        if !inst.morphisms.is_empty() {
            report.push(inst, "naturality", check_naturality(f, z, &inst.objects, &inst.morphisms, bound));
        }
        for sigma in all_permutations(z.arity()) {
            let outcome = check_symmetry(f, z, &inst.objects, &sigma, bound);
            report.push(inst, &format!("symmetry {sigma:?}"), outcome);
        }
    }
    report
}

/// `⋆_α(X_1, …, X_n)`: the points `Σ α_i x_i` of the indexed join. As a
/// convex set this is the product of the factors with positive weight;
/// it is presented by generator tuples, the factor relations lifted slot
/// by slot, and exchange relations `½(a, b) + ½(a', b') = ½(a, b') + ½(a', b)`.
#[derive(Clone, Debug)]
pub struct StarAlpha {
    alpha: QConvOp,
    kept: Vec<usize>,
    join: Arc<Join>,
    presentation: Arc<Presentation>,
}

pub fn star_alpha(alpha: &QConvOp, xs: &[Arc<Presentation>]) -> Result<StarAlpha> {
    if alpha.arity() != xs.len() {
        return Err(Error::ArityMismatch { expected: alpha.arity(), found: xs.len() });
    }
    let kept: Vec<usize> = (0..xs.len()).filter(|&i| alpha.weights()[i] != qi(0)).collect();
    let factors: Vec<Arc<Presentation>> = kept.iter().map(|&i| xs[i].clone()).collect();
    let t = tensor(&factors)?;
    let mut relations: Vec<(Distribution, Distribution)> = t.presentation().relations().to_vec();
    let tuples: Vec<Vec<String>> = t.tuples().cloned().collect();
    let half = q(1, 2);
    let mut seen = BTreeSet::new();
    for (i, a) in tuples.iter().enumerate() {
        for b in &tuples[i + 1..] {
            for s in 0..kept.len() {
                if a[s] == b[s] {
                    continue;
                }
                let (mut a2, mut b2) = (a.clone(), b.clone());
                std::mem::swap(&mut a2[s], &mut b2[s]);
                let pair = |x: &[String], y: &[String]| {
                    Distribution::new([(tuple_name(x), half.clone()), (tuple_name(y), half.clone())]).expect("midpoint")
                };
                let (lhs, rhs) = (pair(a, b), pair(&a2, &b2));
                if lhs == rhs {
                    continue;
                }
                let key = if lhs < rhs { (lhs.clone(), rhs.clone()) } else { (rhs.clone(), lhs.clone()) };
                if seen.insert(key) {
                    relations.push((lhs, rhs));
                }
            }
        }
    }
    let presentation = Arc::new(Presentation::new(t.presentation().generators().to_vec(), relations)?);
    Ok(StarAlpha { alpha: alpha.clone(), kept, join: Join::new(xs.to_vec())?, presentation })
}

impl StarAlpha {
    pub fn presentation(&self) -> &Arc<Presentation> {
        &self.presentation
    }

    pub fn join(&self) -> &Arc<Join> {
        &self.join
    }

    /// Indices of the slots with positive weight.
    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    /// The inclusion `ι_α` into the flattened join.
    pub fn iota(&self) -> Result<ConvexMap> {
        let mut images = BTreeMap::new();
        for g in self.presentation.generators() {
            let t = crate::tensor::parse_tuple_name(g).expect("tuple generator");
            let pairs = self.kept.iter().zip(&t).map(|(&i, x)| (tagged(i, x), self.alpha.weights()[i].clone()));
            images.insert(g.clone(), Distribution::new(pairs)?);
        }
        ConvexMap::from_images_unchecked(self.presentation.clone(), self.join.flat().clone(), images)
    }

    /// `ℓ_α(x_1, …, x_n) = Σ α_i x_i`.
    pub fn ell(&self, xs: &[PresentedElement]) -> Result<PresentedElement> {
        let factors = self.join.factors();
        if xs.len() != factors.len() {
            return Err(Error::ArityMismatch { expected: factors.len(), found: xs.len() });
        }
        for (i, (x, f)) in xs.iter().zip(factors).enumerate() {
            if !crate::presented::same_presentation(x.presentation(), f) {
                return Err(Error::FactorMismatch(i));
            }
        }
        let reps: Vec<&Distribution> = self.kept.iter().map(|&i| xs[i].rep()).collect();
        self.presentation.element(expand(&reps))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OConvexReport {
    pub instance: String,
    pub strict: bool,
    pub targets: bool,
    pub lifts: bool,
    pub fibrewise_convex: bool,
    pub n_convex: bool,
    pub failures: Vec<String>,
}

impl OConvexReport {
    pub fn passed(&self) -> bool {
        self.strict && self.targets && self.lifts && self.fibrewise_convex && self.n_convex
    }
}

/// The total category of a lax functor with its operations
/// `⊙_z((i_k, x_k)) = (⊗_z(i), ξ^z(x_1 ⊗ … ⊗ x_n))`.
#[derive(Clone, Debug)]
pub struct OConvexFibration {
    functor: LaxFunctor,
    convex: ConvexFibration,
    bound: usize,
}

pub fn o_grothendieck(f: &LaxFunctor, bound: usize) -> OConvexFibration {
    OConvexFibration { functor: f.clone(), convex: convex_grothendieck(&f.underlying), bound }
}

impl OConvexFibration {
    pub fn fibration(&self) -> &ConvexFibration {
        &self.convex
    }

    pub fn functor(&self) -> &LaxFunctor {
        &self.functor
    }

    pub fn operate(&self, z: &Operation, xs: &[TotalObject]) -> Result<TotalObject> {
        let objs: Vec<String> = xs.iter().map(|x| x.base.clone()).collect();
        let base = self.functor.category.tensor_objects(z, &objs)?;
        let reps: Vec<&Distribution> = xs.iter().map(|x| x.element.rep()).collect();
        let rep = self.functor.apply_xi(z, &objs, &reps, self.bound)?;
        self.convex.object(&base, rep)
    }

    pub fn operate_morphisms(&self, z: &Operation, ms: &[TotalMorphism]) -> Result<TotalMorphism> {
        let mors: Vec<String> = ms.iter().map(|m| m.base.clone()).collect();
        let base = self.functor.category.tensor_morphisms(z, &mors)?;
        let sources: Vec<TotalObject> = ms.iter().map(|m| self.convex.source(m)).collect();
        Ok(TotalMorphism { base, source: self.operate(z, &sources)?.element })
    }

    fn sample_fibre(&self, obj: &str) -> Result<Vec<TotalObject>> {
        let pres = self.functor.underlying.object(obj);
        let mut out: Vec<TotalObject> =
            pres.generators().iter().map(|g| self.convex.object(obj, Distribution::delta(g.clone()))).collect::<Result<_>>()?;
        if pres.generators().len() > 1 {
            out.push(self.convex.object(obj, Distribution::uniform(pres.generators().iter().cloned())?)?);
        }
        Ok(out)
    }

    fn same(&self, a: &TotalObject, b: &TotalObject) -> Result<bool> {
        if a.base != b.base {
            return Ok(false);
        }
        let pres = self.functor.underlying.object(&a.base);
        Ok(pres.decide(a.element.rep(), b.element.rep(), self.bound)?.status() == EqualityStatus::Equal)
    }

    /// Strictness, compatibility with targets, unique lifts, fibrewise
    /// convexity and n-convexity of `⊙_z` on sampled fibre elements.
    pub fn check_instance(&self, inst: &Instance) -> Result<OConvexReport> {
        let z = &inst.operation;
        let cat = self.functor.category.category().clone();
        let objs = &inst.objects;
        let mut report = OConvexReport {
            instance: inst.key(),
            strict: true,
            targets: true,
            lifts: true,
            fibrewise_convex: true,
            n_convex: true,
            failures: Vec::new(),
        };
        let samples: Vec<Vec<TotalObject>> = objs.iter().map(|o| self.sample_fibre(o)).collect::<Result<_>>()?;
        if samples.iter().any(Vec::is_empty) {
            return Ok(report);
        }
        let mors: Vec<String> = if inst.morphisms.is_empty() {
            objs.iter().map(|o| cat.identity(o).to_string()).collect()
        } else {
            inst.morphisms.clone()
        };
        let expected_obj = self.functor.category.tensor_objects(z, objs)?;
        let expected_mor = self.functor.category.tensor_morphisms(z, &mors)?;
        let mut operated_morphisms = Vec::new();
        for xs in product(&samples) {
            let out = self.operate(z, &xs)?;
            if out.base != expected_obj {
                report.strict = false;
                report.failures.push(format!("object lies over {} instead of {expected_obj}", out.base));
            }
            let lifted = xs.iter().zip(&mors).map(|(x, m)| self.convex.lift(m, x)).collect::<Result<Vec<_>>>()?;
            let om = self.operate_morphisms(z, &lifted)?;
            if om.base != expected_mor {
                report.strict = false;
                report.failures.push(format!("morphism lies over {} instead of {expected_mor}", om.base));
            }
            let targets = lifted.iter().map(|m| self.convex.target(m)).collect::<Result<Vec<_>>>()?;
            if !self.same(&self.convex.target(&om)?, &self.operate(z, &targets)?)? {
                report.targets = false;
                report.failures.push(format!("target of ⊙ of lifts differs from ⊙ of targets at {:?}", xs_reps(&xs)));
            }
            for f in cat.morphisms().filter(|m| m.src == out.base) {
                let lift = self.convex.lift(&f.id, &out)?;
                if self.convex.source(&lift) != out || self.convex.target(&lift)?.base != f.tgt {
                    report.lifts = false;
                    report.failures.push(format!("lift of {} misbehaves", f.id));
                }
            }
            operated_morphisms.push(om);
        }
        let beta = [q(1, 3), q(2, 3)];
        for pair in operated_morphisms.windows(2) {
            let check = self.convex.check_fibrewise(&beta, pair, self.bound)?;
            if !check.all() {
                report.fibrewise_convex = false;
                report.failures.push(format!("fibrewise equations fail: {check:?}"));
            }
        }
        for k in 0..objs.len() {
            let fixed: Vec<TotalObject> = samples.iter().map(|s| s[0].clone()).collect();
            for a in &samples[k] {
                for b in &samples[k] {
                    if a == b {
                        continue;
                    }
                    let mut with_mix = fixed.clone();
                    with_mix[k] = self.convex.mix_objects(&beta, &[a.clone(), b.clone()])?;
                    let (mut with_a, mut with_b) = (fixed.clone(), fixed.clone());
                    with_a[k] = a.clone();
                    with_b[k] = b.clone();
                    let lhs = self.operate(z, &with_mix)?;
                    let rhs = self.convex.mix_objects(&beta, &[self.operate(z, &with_a)?, self.operate(z, &with_b)?])?;
                    if !self.same(&lhs, &rhs)? {
                        report.n_convex = false;
                        report.failures.push(format!("slot {k} is not affine at {} / {}", a.element.rep(), b.element.rep()));
                    }
                }
            }
        }
        Ok(report)
    }

    /// The lax functor read back from the total structure: fibres, lifts,
    /// and `ξ^z` on generator tuples as `⊙_z` of the corresponding points.
    pub fn extract(&self) -> Result<LaxFunctor> {
        let underlying = self.convex.extract(self.bound)?;
        let this = self.clone();
        let xi: Arc<XiFn> = Arc::new(move |z: &Operation, objs: &[String]| {
            let factors: Vec<Arc<Presentation>> = objs.iter().map(|o| this.functor.underlying.object(o).clone()).collect();
            let target = this.functor.category.tensor_objects(z, objs)?;
            let mut table = BTreeMap::new();
            for t in generator_tuples(&this.functor, objs) {
                let xs = t
                    .iter()
                    .zip(objs)
                    .map(|(g, o)| this.convex.object(o, Distribution::delta(g.clone())))
                    .collect::<Result<Vec<_>>>()?;
                table.insert(t, this.operate(z, &xs)?.element.into_rep());
            }
            NConvexMapSpec::new(factors, this.functor.underlying.object(&target).clone(), table)
        });
        LaxFunctor::new(self.functor.category.clone(), underlying, xi)
    }

    /// The binary monoidal product of the plain monoidal construction,
    /// built from the symmetric tensor and the binary structure map only.
    pub fn direct_product(&self, a: &TotalObject, b: &TotalObject) -> Result<TotalObject> {
        let objs = [a.base.clone(), b.base.clone()];
        let base = self.functor.category.base().tensor(&objs)?;
        let spec = (self.functor.xi)(&Operation::Comm(2), &objs)?;
        let map = extend_multiconvex(&spec, self.bound)?;
        let rep = map.apply_rep(&expand(&[a.element.rep(), b.element.rep()]))?;
        self.convex.object(&base, rep)
    }

    /// Compares `⊙` of arity 2 and 3 with iterated binary products.
    pub fn agrees_with_direct(&self, xs: &[TotalObject]) -> Result<bool> {
        match xs {
            [a, b] => self.same(&self.operate(&Operation::Comm(2), xs)?, &self.direct_product(a, b)?),
            [a, b, c] => {
                let nested = self.direct_product(&self.direct_product(a, b)?, c)?;
                let other = self.direct_product(a, &self.direct_product(b, c)?)?;
                let op = self.operate(&Operation::Comm(3), xs)?;
                Ok(self.same(&op, &nested)? && self.same(&op, &other)?)
            }
            _ => Err(Error::InvalidInput("direct comparison covers arity 2 and 3".into())),
        }
    }
}

fn xs_reps(xs: &[TotalObject]) -> Vec<String> {
    xs.iter().map(|x| x.element.rep().to_string()).collect()
}

/// Two lax functors agree up to the identity natural isomorphism: same
/// underlying functor and equal `ξ` tables on the given instances.
pub fn lax_functors_agree(a: &LaxFunctor, b: &LaxFunctor, instances: &[Instance], bound: usize) -> Result<bool> {
    if !a.underlying.agrees_with(&b.underlying, bound)? {
        return Ok(false);
    }
    for inst in instances {
        let (sa, sb) = (a.xi(&inst.operation, &inst.objects)?, b.xi(&inst.operation, &inst.objects)?);
        for (t, v) in &sa.table {
            if same_in(&sa.target, v, &sb.table[t], bound).is_err() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{delta, dist};
    use crate::tensor::is_isomorphism;

    fn qc(ws: &[(i64, i64)]) -> Operation {
        Operation::QConv(QConvOp::new(ws.iter().map(|&(a, b)| q(a, b)).collect()).unwrap())
    }

    #[test]
    fn operad_composition_and_action() {
        let z = qc(&[(1, 2), (1, 2)]);
        let c = z.compose(&[qc(&[(1, 3), (2, 3)]), Operation::unit(OperadKind::QConv)]).unwrap();
        assert_eq!(c, qc(&[(1, 6), (1, 3), (1, 2)]));
        let a = Operation::Assoc(vec![1, 0]);
        let c = a.compose(&[Operation::Assoc(vec![0, 1]), Operation::Assoc(vec![0])]).unwrap();
        assert_eq!(c, Operation::Assoc(vec![2, 0, 1]));
        for kind in [OperadKind::Trivial, OperadKind::Assoc, OperadKind::Comm, OperadKind::QConv] {
            assert!(Operation::unit(kind).is_unit());
        }
        let w = qc(&[(1, 6), (1, 3), (1, 2)]);
        let (s, t) = (vec![1, 2, 0], vec![2, 1, 0]);
        assert_eq!(w.act(&s).unwrap().act(&t).unwrap(), w.act(&compose_permutations(&s, &t)).unwrap());
    }

    #[test]
    fn grid_sizes() {
        let grid = qconv_grid(4, 3);
        assert_eq!(grid.iter().filter(|o| o.arity() == 1).count(), 1);
        assert_eq!(grid.iter().filter(|o| o.arity() == 2).count(), 7);
        assert!(grid.iter().all(|o| o.weights().iter().all(|w| *w.denom() <= 4.into())));
    }

    #[test]
    fn bases_are_symmetric_monoidal() {
        trivial_structure(Arc::new(FinCoproduct::new(3)), OperadKind::QConv).unwrap();
        trivial_structure(Arc::new(MaxOrder::new(3)), OperadKind::Comm).unwrap();
        trivial_structure(Arc::new(PointBase::new()), OperadKind::Trivial).unwrap();
    }

    #[test]
    fn dist_structure_is_lax() {
        let f = dist_lax_functor(Arc::new(FinCoproduct::new(3))).unwrap();
        let ops: Vec<Operation> = qconv_grid(2, 3).into_iter().map(Operation::QConv).collect();
        let instances = sample_instances(f.category(), &ops);
        let report = check_lax(&f, &instances, 2);
        assert!(report.passed(), "{:?}", report.failures().next());
        let inner = [Operation::unit(OperadKind::QConv), qc(&[(1, 2), (1, 2)])];
        let composites = composite_instances(f.category(), &[qc(&[(1, 3), (2, 3)])], &inner);
        assert!(!composites.is_empty());
        assert!(check_lax(&f, &composites, 2).passed());
    }

    #[test]
    fn corrupted_structure_is_reported() {
        let f = dist_lax_functor(Arc::new(FinCoproduct::new(3))).unwrap();
        let z = qc(&[(1, 2), (1, 2)]);
        let objs = vec!["1".to_string(), "1".to_string()];
        let bad = f.with_override(&z, &objs, &["0".into(), "0".into()], delta("0"));
        let report = check_lax(&bad, &[Instance::new(z, objs)], 2);
        assert!(!report.passed());
        assert!(report.failures().any(|e| e.check.starts_with("symmetry")));
    }

    #[test]
    fn star_alpha_examples() {
        let x = Arc::new(Presentation::free(["a", "b"]).unwrap());
        let y = Arc::new(Presentation::free(["c"]).unwrap());
        let one = QConvOp::unit();
        let s = star_alpha(&one, std::slice::from_ref(&x)).unwrap();
        let to_x = ConvexMap::from_images_unchecked(
            s.presentation().clone(),
            x.clone(),
            [(tuple_name(&["a"]), delta("a")), (tuple_name(&["b"]), delta("b"))].into_iter().collect(),
        )
        .unwrap();
        let from_x = ConvexMap::from_images_unchecked(
            x.clone(),
            s.presentation().clone(),
            [("a".to_string(), delta(&tuple_name(&["a"]))), ("b".to_string(), delta(&tuple_name(&["b"])))].into_iter().collect(),
        )
        .unwrap();
        assert!(is_isomorphism(&to_x, &from_x, 2).unwrap());
        let s10 = star_alpha(&QConvOp::new(vec![qi(1), qi(0)]).unwrap(), &[x.clone(), y.clone()]).unwrap();
        assert_eq!(s10.presentation().generators().len(), 2);
        let mid = star_alpha(&QConvOp::new(vec![q(1, 2), q(1, 2)]).unwrap(), &[y.clone(), y.clone()]).unwrap();
        assert_eq!(mid.presentation().generators().len(), 1);
        assert!(matches!(star_alpha(&one, &[x.clone(), y]), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn star_alpha_inclusion_matches_join_points() {
        let x = Arc::new(Presentation::free(["a", "b"]).unwrap());
        let y = Arc::new(Presentation::free(["c", "d"]).unwrap());
        let alpha = QConvOp::new(vec![q(1, 3), q(2, 3)]).unwrap();
        let s = star_alpha(&alpha, &[x.clone(), y.clone()]).unwrap();
        let iota = s.iota().unwrap();
        iota.check_well_defined(2).unwrap();
        let xe = x.element(dist(&[("a", q(1, 2)), ("b", q(1, 2))])).unwrap();
        let ye = y.generator("d").unwrap();
        let point = s.ell(&[xe.clone(), ye.clone()]).unwrap();
        let in_join = iota.evaluate(&point).unwrap();
        let expected = crate::join::join_point(s.join(), q(1, 3), Some(xe), Some(ye)).unwrap().flatten();
        assert!(crate::presented::eq(&in_join, &expected, 2).unwrap().is_equal());
        // Exchange relations make the presented set a product.
        let swap_a = s.presentation().element(dist(&[(&tuple_name(&["a", "c"]), q(1, 2)), (&tuple_name(&["b", "d"]), q(1, 2))])).unwrap();
        let swap_b = s.presentation().element(dist(&[(&tuple_name(&["a", "d"]), q(1, 2)), (&tuple_name(&["b", "c"]), q(1, 2))])).unwrap();
        assert!(crate::presented::eq(&swap_a, &swap_b, 1).unwrap().is_equal());
    }

    #[test]
    fn grothendieck_of_dist_is_convex() {
        let f = dist_lax_functor(Arc::new(FinCoproduct::new(3))).unwrap();
        let total = o_grothendieck(&f, 2);
        let z = qc(&[(1, 4), (3, 4)]);
        let inst = Instance { morphisms: vec!["1->2:1".into(), "id_1".into()], ..Instance::new(z.clone(), vec!["1".into(), "1".into()]) };
        let report = total.check_instance(&inst).unwrap();
        assert!(report.passed(), "{report:?}");
        let report = total.check_instance(&Instance::new(z.clone(), vec!["2".into(), "1".into()])).unwrap();
        assert!(report.passed(), "{report:?}");
        let back = total.extract().unwrap();
        assert!(lax_functors_agree(&f, &back, &[Instance::new(z, vec!["2".into(), "1".into()])], 2).unwrap());
    }

    #[test]
    fn comm_structure_matches_direct_construction() {
        let f = max_lax_functor(Arc::new(MaxOrder::new(3)), OperadKind::Comm).unwrap();
        let total = o_grothendieck(&f, 2);
        let fib = total.fibration();
        let a = fib.object("1", dist(&[("0", q(1, 2)), ("1", q(1, 2))])).unwrap();
        let b = fib.object("0", delta("0")).unwrap();
        let c = fib.object("2", delta("1")).unwrap();
        assert!(total.agrees_with_direct(&[a.clone(), b.clone()]).unwrap());
        assert!(total.agrees_with_direct(&[a, b, c]).unwrap());
        let report = check_lax(&f, &sample_instances(f.category(), &[Operation::Comm(2)]), 2);
        assert!(report.passed());
    }

    #[test]
    fn point_base_degenerates() {
        let x = Arc::new(Presentation::free(["a", "b"]).unwrap());
        let f = constant_lax_functor(&x).unwrap();
        assert!(check_lax(&f, &[Instance::new(Operation::Trivial, vec!["0".into()])], 2).passed());
        let total = o_grothendieck(&f, 2);
        let p = total.fibration().object("0", delta("a")).unwrap();
        assert_eq!(total.operate(&Operation::Trivial, std::slice::from_ref(&p)).unwrap(), p);
    }

    #[test]
    fn instance_json_round_trip() {
        let text = r#"{"operation":{"arity":2,"alpha":["1/4","3/4"]},"objects":["1","2"],"morphisms":[]}"#;
        let inst = Instance::from_json(text).unwrap().remove(0);
        assert_eq!(inst.operation, qc(&[(1, 4), (3, 4)]));
        let back = Instance::from_json(&inst.to_json().to_string()).unwrap();
        assert_eq!(back, vec![inst]);
    }
}
