//! Command dispatch for the `convexion` binary. Every verb loads JSON
//! inputs, runs one module operation and produces a JSON report.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use convexion_core::category::{
    convex_grothendieck, counit_functor, extract_functor, grothendieck, is_discrete_fibration, is_fibration_isomorphism,
    is_natural_isomorphism, unit_isomorphism, CSetFunctor, FiniteCategory, SetFunctor,
};
use convexion_core::distribution::{convex_combine, Distribution};
use convexion_core::finprob::{
    generate_corpus, shannon_entropy, verify_entropy_axioms, Candidate, Corpus, ProbObject, SIGN_CONVENTION,
};
use convexion_core::join::{copair, join_mix, Join, JoinElement};
use convexion_core::omon::{
    check_lax, dist_lax_functor, max_lax_functor, o_grothendieck, qconv_grid, sample_instances, star_alpha,
    FinCoproduct, Instance, MaxOrder, OperadKind, Operation,
};
use convexion_core::presented::{eq, hom_combine, induce_map, quotient_mix, ConvexMap, Presentation};
use convexion_core::prop::{algebra_apply, qconv_compose, Matrix, QConvOp};
use convexion_core::semiring::{format_rational, parse_rational, Rational};
use convexion_core::simplicial::{
    bundle_tensor, check_simplicial_distribution, is_bundle_isomorphism, mu_product, some_distribution,
    twisted_product, twisted_sum_map, SimplicialAbelianGroup, TruncatedSimplicialSet, TwistMonoid, TwistingFunction,
};
use convexion_core::tensor::{
    check_biconvex_not_convex_counterexample, check_coherence_diagrams, coherence, enriched_bridge,
    examples, extend_multiconvex, free_tensor_iso, is_isomorphism, tensor, CoherenceKind, NConvexMapSpec,
};
use convexion_core::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Which verb reaches each library operation.
pub const COVERAGE: &[(&str, &str)] = &[
    ("delta", "dist"),
    ("pushforward", "dist"),
    ("flatten", "dist"),
    ("convex_combine", "dist"),
    ("quotient_mix", "eq"),
    ("eq", "eq"),
    ("induce_map", "eq"),
    ("hom_combine", "eq"),
    ("join_point", "join"),
    ("join_mix", "join"),
    ("copair", "join"),
    ("tensor", "tensor"),
    ("universal_map", "tensor"),
    ("extend_multiconvex", "tensor"),
    ("coherence", "tensor"),
    ("check_biconvex_not_convex_counterexample", "tensor"),
    ("enriched_bridge", "tensor"),
    ("is_convex_matrix", "prop"),
    ("compose", "prop"),
    ("direct_sum", "prop"),
    ("permute", "prop"),
    ("qconv_compose", "prop"),
    ("algebra_apply", "prop"),
    ("grothendieck", "groth"),
    ("is_discrete_fibration", "groth"),
    ("extract_functor", "groth"),
    ("convex_grothendieck", "groth"),
    ("trivial_structure", "omon"),
    ("star_alpha", "omon"),
    ("o_grothendieck", "omon"),
    ("check_lax", "omon"),
    ("shannon_entropy", "entropy"),
    ("info_loss", "entropy"),
    ("convex_combine_morphisms", "entropy"),
    ("verify_entropy_axioms", "entropy"),
    ("dist_lax_xi", "entropy"),
    ("twisted_product", "twist"),
    ("check_simplicial_distribution", "twist"),
    ("bundle_tensor", "twist"),
    ("mu_product", "twist"),
    ("twist_monoid_structure", "twist"),
    ("run", "selfcheck"),
];

const ERRATUM_SIGN: &str = "information loss is H(source) - H(target), nonnegative on measure-preserving maps";
const ERRATUM_PRODUCT: &str = "the simplicial product m(p, q) is the product measure p(x)q(y)";
const ERRATUM_JOIN: &str = "join mixing renormalizes each factor by its total weight";
const ERRATUM_COUNTEREXAMPLE: &str =
    "the convex-hypothesis composite in the composition counterexample evaluates to 1/2 d0 + 1/2 d3";

#[derive(Parser, Debug)]
#[command(name = "convexion", version, about = "Exact computations with convex sets, operads and simplicial distributions")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub verb: Verb,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Step bound for equality searches.
    #[arg(long, global = true, default_value_t = 4)]
    pub bound: usize,
    /// Tolerance for floating-point entropy checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Seed for generated corpora.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Also write the report to this file.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Verb {
    /// Finite distributions.
    Dist {
        #[command(subcommand)]
        action: DistAction,
    },
    /// Decide equality of two elements of a presented convex set.
    Eq {
        #[arg(long)]
        presentation: PathBuf,
        #[arg(long)]
        lhs: PathBuf,
        #[arg(long)]
        rhs: PathBuf,
    },
    /// Joins of two presented convex sets.
    Join {
        #[command(subcommand)]
        action: JoinAction,
    },
    /// Convex tensor products.
    Tensor {
        #[command(subcommand)]
        action: TensorAction,
    },
    /// Convex matrices and quasiconvex operations.
    Prop {
        #[command(subcommand)]
        action: PropAction,
    },
    /// Grothendieck constructions over a finite category.
    Groth {
        #[arg(long)]
        category: PathBuf,
        #[arg(long)]
        functor: PathBuf,
        /// Also run the convex construction on the free functor.
        #[arg(long)]
        convex: bool,
    },
    /// Lax functors on symmetric monoidal bases and their total categories.
    Omon {
        #[arg(long, value_enum, default_value_t = FunctorChoice::Dist)]
        functor: FunctorChoice,
        /// Instances to check; defaults to the denominator-4 grid up to arity 3.
        #[arg(long)]
        instances: Option<PathBuf>,
        /// Weights of a quasiconvex operation for the product presentation.
        #[arg(long)]
        star: Option<String>,
    },
    /// Entropy and information loss.
    Entropy {
        #[command(subcommand)]
        action: EntropyAction,
    },
    /// Twisted products and simplicial distributions.
    Twist {
        #[arg(long)]
        simplicial: PathBuf,
        /// `constant:<m>` or `nerve:<m>`.
        #[arg(long, default_value = "constant:2")]
        group: String,
        #[arg(long)]
        eta: PathBuf,
        #[arg(long)]
        other: Option<PathBuf>,
    },
    /// Run the built-in checks.
    Selfcheck,
}

#[derive(Subcommand, Debug)]
pub enum DistAction {
    /// Validate and print a distribution in canonical form.
    Normalize {
        #[arg(long)]
        input: PathBuf,
    },
    /// Mix distributions: `--alpha 1/2,1/2 --inputs a.json,b.json`.
    Mix {
        #[arg(long)]
        alpha: String,
        #[arg(long, value_delimiter = ',')]
        inputs: Vec<PathBuf>,
    },
    /// Push a distribution along a map given as `{"a": "x", ...}`.
    Push {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        map: PathBuf,
    },
    /// Check the monad laws on all grid distributions of a carrier.
    Laws {
        #[arg(long, default_value_t = 4)]
        max_carrier: usize,
        #[arg(long, default_value_t = 4)]
        max_den: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum JoinAction {
    /// Mix binary join points `{"alpha", "x", "y"}`.
    Mix {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        beta: String,
    },
    /// Evaluate the copairing of two maps `{"images": {...}}` at a point.
    Copair {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        point: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum TensorAction {
    /// Extend a multiconvex table to a map out of the tensor.
    Extend {
        #[arg(long)]
        spec: PathBuf,
    },
    /// The pure tensor of elements of the given presentations.
    Pure {
        #[arg(long, value_delimiter = ',')]
        factors: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        elements: Vec<PathBuf>,
    },
    /// The composition counterexample.
    Counterexample,
    /// Coherence isomorphisms and diagrams on free factors of the given sizes.
    Coherence {
        #[arg(long, value_delimiter = ',', default_value = "2,1,2,1")]
        sizes: Vec<usize>,
    },
    /// Check `D(X) ⊗ D(Y) ≅ D(X × Y)`.
    FreeIso {
        #[arg(long)]
        x: usize,
        #[arg(long)]
        y: usize,
    },
    /// Turn a built-in biconvex category into enriched data.
    Bridge {
        #[arg(long, value_enum)]
        example: BridgeExample,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum BridgeExample {
    Trivial,
    ParallelPair,
    Swap,
    SwapCorrupt,
}

#[derive(Subcommand, Debug)]
pub enum PropAction {
    /// Check convexity of a matrix `{"rows", "cols", "entries"}`.
    Check {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// `left · right`.
    Compose {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
    },
    DirectSum {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
    },
    Permute {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_delimiter = ',')]
        rows: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        cols: Vec<usize>,
    },
    /// Operadic composition: `--outer 1/2,1/2 --inner 1/3,2/3 --inner 1`.
    Qconv {
        #[arg(long)]
        outer: String,
        #[arg(long)]
        inner: Vec<String>,
    },
    /// Apply a convex matrix to elements of a presented convex set.
    Apply {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        presentation: PathBuf,
        #[arg(long, value_delimiter = ',')]
        elements: Vec<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FunctorChoice {
    /// Distributions over finite sets with coproduct tensor.
    Dist,
    /// Distributions over a finite chain with maximum as tensor.
    Max,
}

#[derive(Subcommand, Debug)]
pub enum EntropyAction {
    /// Check additivity, convexity and continuity of a candidate.
    Verify {
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// `info_loss`, `squared`, `scaled:<c>` or `custom-table:<file>`.
        #[arg(long, default_value = "info_loss")]
        candidate: String,
    },
    /// Write a seeded corpus.
    Generate {
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 8)]
        max_carrier: usize,
    },
    /// Shannon entropy of a measure given as a list of weights.
    Value {
        #[arg(long, value_delimiter = ',')]
        weights: Vec<String>,
    },
}

/// What went wrong while running a command.
#[derive(Debug)]
pub enum Failure {
    /// Unreadable or invalid input: exit status 2.
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

/// A finished command: the report body and whether all checks passed.
pub struct Outcome {
    pub passed: bool,
    pub result: Value,
    pub errata: Vec<&'static str>,
}

impl Outcome {
    fn ok(result: Value) -> Self {
        Outcome { passed: true, result, errata: Vec::new() }
    }

    fn checked(passed: bool, result: Value) -> Self {
        Outcome { passed, result, errata: Vec::new() }
    }

    fn with(mut self, erratum: &'static str) -> Self {
        self.errata.push(erratum);
        self
    }
}

type Run = std::result::Result<Outcome, Failure>;

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load<T: serde::de::DeserializeOwned>(path: &Path) -> std::result::Result<T, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_presentation(path: &Path) -> std::result::Result<Arc<Presentation>, Failure> {
    Ok(Arc::new(load::<Presentation>(path)?))
}

fn weights(text: &str) -> std::result::Result<Vec<Rational>, Failure> {
    text.split(',').map(|w| parse_rational(w).map_err(Failure::from)).collect()
}

/// `{"images": {"g": <distribution>, ...}}`
fn load_map(path: &Path, src: &Arc<Presentation>, tgt: &Arc<Presentation>) -> std::result::Result<ConvexMap, Failure> {
    let value: Value = load(path)?;
    let images: BTreeMap<String, Distribution> = serde_json::from_value(value.get("images").cloned().unwrap_or(Value::Null))
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(ConvexMap::from_images_unchecked(src.clone(), tgt.clone(), images)?)
}

fn dist_json(d: &Distribution) -> Value {
    serde_json::to_value(d).expect("distribution serializes")
}

/// Runs a parsed command.
pub fn run(cli: &Cli) -> Run {
    let g = &cli.global;
    match &cli.verb {
        Verb::Dist { action } => run_dist(action),
        Verb::Eq { presentation, lhs, rhs } => {
            let pres = load_presentation(presentation)?;
            let a = pres.element(load(lhs)?)?;
            let b = pres.element(load(rhs)?)?;
            let verdict = eq(&a, &b, g.bound)?;
            let valid = verdict.validate(&pres, a.rep(), b.rep());
            Ok(Outcome::checked(valid, json!({ "verdict": verdict.to_json(), "witness_valid": valid })))
        }
        Verb::Join { action } => run_join(action, g),
        Verb::Tensor { action } => run_tensor(action, g),
        Verb::Prop { action } => run_prop(action),
        Verb::Groth { category, functor, convex } => run_groth(category, functor, *convex, g),
        Verb::Omon { functor, instances, star } => run_omon(*functor, instances.as_deref(), star.as_deref(), g),
        Verb::Entropy { action } => run_entropy(action, g),
        Verb::Twist { simplicial, group, eta, other } => run_twist(simplicial, group, eta, other.as_deref()),
        Verb::Selfcheck => selfcheck(g),
    }
}

fn run_dist(action: &DistAction) -> Run {
    match action {
        DistAction::Normalize { input } => Ok(Outcome::ok(dist_json(&load::<Distribution>(input)?))),
        DistAction::Mix { alpha, inputs } => {
            let ds = inputs.iter().map(|p| load::<Distribution>(p)).collect::<std::result::Result<Vec<_>, _>>()?;
            Ok(Outcome::ok(dist_json(&convex_combine(&weights(alpha)?, &ds)?)))
        }
        DistAction::Push { input, map } => {
            let d: Distribution = load(input)?;
            let f: BTreeMap<String, String> = load(map)?;
            Ok(Outcome::ok(dist_json(&d.pushforward(|x| f.get(x).cloned())?)))
        }
        DistAction::Laws { max_carrier, max_den } => {
            let mut checked = 0usize;
            let mut failures = Vec::new();
            for k in 1..=*max_carrier {
                for w in grid(k, *max_den) {
                    let p = Distribution::new((0..k).zip(w))?;
                    checked += 1;
                    if Distribution::delta(p.clone()).flatten() != p || p.map_delta().flatten() != p {
                        failures.push(format!("{p}"));
                    }
                }
            }
            Ok(Outcome::checked(failures.is_empty(), json!({ "checked": checked, "failures": failures })))
        }
    }
}

/// Weight vectors of length `n` with denominators at most `max_den`.
fn grid(n: usize, max_den: usize) -> Vec<Vec<Rational>> {
    fn parts(total: usize, n: usize) -> Vec<Vec<usize>> {
        if n == 1 {
            return vec![vec![total]];
        }
        (0..=total)
            .flat_map(|k| {
                parts(total - k, n - 1).into_iter().map(move |mut r| {
                    r.insert(0, k);
                    r
                })
            })
            .collect()
    }
    let mut all: Vec<Vec<Rational>> = (1..=max_den)
        .flat_map(|d| parts(d, n).into_iter().map(move |ks| ks.iter().map(|&k| Rational::new(k.into(), d.into())).collect()))
        .collect();
    all.sort();
    all.dedup();
    all
}

fn run_join(action: &JoinAction, g: &Global) -> Run {
    match action {
        JoinAction::Mix { x, y, points, beta } => {
            let join = Join::binary(load_presentation(x)?, load_presentation(y)?)?;
            let raw: Vec<Value> = load(points)?;
            let pts = raw.iter().map(|v| JoinElement::from_json(&join, v)).collect::<convexion_core::Result<Vec<_>>>()?;
            let mixed = join_mix(&weights(beta)?, &pts)?;
            Ok(Outcome::ok(json!({ "point": mixed.to_json(), "flat": dist_json(mixed.flatten().rep()) })).with(ERRATUM_JOIN))
        }
        JoinAction::Copair { x, y, target, f, g: gpath, point } => {
            let (xs, ys, zs) = (load_presentation(x)?, load_presentation(y)?, load_presentation(target)?);
            let fm = load_map(f, &xs, &zs)?;
            let gm = load_map(gpath, &ys, &zs)?;
            fm.check_well_defined(g.bound)?;
            gm.check_well_defined(g.bound)?;
            let join = Join::binary(xs, ys)?;
            let h = copair(&join, fm, gm)?;
            let pt = JoinElement::from_json(&join, &load(point)?)?;
            Ok(Outcome::ok(json!({ "value": dist_json(h.evaluate(&pt)?.rep()) })))
        }
    }
}

fn run_tensor(action: &TensorAction, g: &Global) -> Run {
    match action {
        TensorAction::Extend { spec } => {
            let spec = NConvexMapSpec::from_json(&read(spec)?)?;
            match extend_multiconvex(&spec, g.bound) {
                Ok(map) => {
                    let images: BTreeMap<&String, Value> = map.images().iter().map(|(k, v)| (k, dist_json(v))).collect();
                    Ok(Outcome::ok(json!({ "multiconvex": true, "images": images })))
                }
                Err(e @ (Error::RelationViolated { .. } | Error::Undecided { .. })) => {
                    Ok(Outcome::checked(false, json!({ "multiconvex": false, "reason": e.to_string() })))
                }
                Err(e) => Err(e.into()),
            }
        }
        TensorAction::Pure { factors, elements } => {
            let fs = factors.iter().map(|p| load_presentation(p)).collect::<std::result::Result<Vec<_>, _>>()?;
            if fs.len() != elements.len() {
                return Err(Failure::Input(format!("{} factors but {} elements", fs.len(), elements.len())));
            }
            let xs = fs
                .iter()
                .zip(elements)
                .map(|(f, p)| Ok(f.element(load(p)?)?))
                .collect::<std::result::Result<Vec<_>, Failure>>()?;
            let t = tensor(&fs)?;
            let pure = t.universal_map(&xs)?;
            Ok(Outcome::ok(json!({ "generators": t.presentation().generators(), "element": dist_json(pure.rep()) })))
        }
        TensorAction::Counterexample => counterexample(g),
        TensorAction::Coherence { sizes } => {
            if sizes.len() != 4 {
                return Err(Failure::Input("coherence needs four factor sizes".into()));
            }
            let fs: Vec<Arc<Presentation>> = sizes
                .iter()
                .enumerate()
                .map(|(i, &n)| Ok(Arc::new(Presentation::free((0..n).map(|k| format!("{}{k}", (b'a' + i as u8) as char)))?)))
                .collect::<std::result::Result<_, Failure>>()?;
            let mut isos = BTreeMap::new();
            for kind in [CoherenceKind::Associator, CoherenceKind::LeftUnitor, CoherenceKind::RightUnitor, CoherenceKind::Braiding] {
                let (f, inv) = coherence(kind, &fs[..kind.arity()])?;
                isos.insert(format!("{kind:?}"), is_isomorphism(&f, &inv, g.bound)?);
            }
            let diagrams = check_coherence_diagrams(&fs[0], &fs[1], &fs[2], &fs[3], g.bound)?;
            let passed = isos.values().all(|&b| b) && diagrams.iter().all(|d| d.commutes);
            Ok(Outcome::checked(passed, json!({ "isomorphisms": isos, "diagrams": diagrams })))
        }
        TensorAction::FreeIso { x, y } => {
            let names = |p: &str, n: usize| (0..n).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
            let iso = free_tensor_iso(&names("x", *x), &names("y", *y))?;
            let ok = is_isomorphism(&iso.forward, &iso.inverse, g.bound)?;
            Ok(Outcome::checked(ok, json!({ "isomorphism": ok, "generators": iso.product.generators() })))
        }
        TensorAction::Bridge { example } => {
            let cat = match example {
                BridgeExample::Trivial => examples::trivial(),
                BridgeExample::ParallelPair => examples::parallel_pair(),
                BridgeExample::Swap => examples::swap_embeddings(false),
                BridgeExample::SwapCorrupt => examples::swap_embeddings(true),
            };
            match enriched_bridge(&cat, g.bound) {
                Ok(data) => {
                    let violations = data.check_laws(g.bound)?;
                    Ok(Outcome::checked(violations.is_empty(), json!({ "enriched": true, "law_violations": violations })))
                }
                Err(e @ Error::CompositionNotBiconvex(_)) => {
                    Ok(Outcome::checked(false, json!({ "enriched": false, "reason": e.to_string() })))
                }
                Err(e) => Err(e.into()),
            }
        }
    }
}

fn counterexample(g: &Global) -> Run {
    let r = check_biconvex_not_convex_counterexample(g.bound)?;
    let passed = r.unequal && r.composition_is_biconvex && r.tensor_route_agrees;
    let outcome = Outcome::checked(passed, serde_json::to_value(&r).expect("report serializes"));
    Ok(if r.quoted_value_matches_definitions { outcome } else { outcome.with(ERRATUM_COUNTEREXAMPLE) })
}

fn run_prop(action: &PropAction) -> Run {
    let mat = |v: Matrix| serde_json::to_value(v).expect("matrix serializes");
    match action {
        PropAction::Check { matrix } => {
            let m: Matrix = load(matrix)?;
            Ok(Outcome::checked(m.is_convex(), json!({ "convex": m.is_convex() })))
        }
        PropAction::Compose { left, right } => {
            let (a, b): (Matrix, Matrix) = (load(left)?, load(right)?);
            let c = a.compose(&b)?;
            Ok(Outcome::ok(json!({ "convex": c.is_convex(), "matrix": mat(c) })))
        }
        PropAction::DirectSum { left, right } => {
            let (a, b): (Matrix, Matrix) = (load(left)?, load(right)?);
            let c = a.direct_sum(&b);
            Ok(Outcome::ok(json!({ "convex": c.is_convex(), "matrix": mat(c) })))
        }
        PropAction::Permute { matrix, rows, cols } => {
            let m: Matrix = load(matrix)?;
            let c = m.permute(rows, cols)?;
            Ok(Outcome::ok(json!({ "convex": c.is_convex(), "matrix": mat(c) })))
        }
        PropAction::Qconv { outer, inner } => {
            let z = QConvOp::new(weights(outer)?)?;
            let xs = inner.iter().map(|w| Ok(QConvOp::new(weights(w)?)?)).collect::<std::result::Result<Vec<_>, Failure>>()?;
            let c = qconv_compose(&z, &xs)?;
            Ok(Outcome::ok(json!({ "weights": c.weights().iter().map(format_rational).collect::<Vec<_>>() })))
        }
        PropAction::Apply { matrix, presentation, elements } => {
            let m: Matrix = load(matrix)?;
            let pres = load_presentation(presentation)?;
            let xs = elements.iter().map(|p| Ok(pres.element(load(p)?)?)).collect::<std::result::Result<Vec<_>, Failure>>()?;
            let out = algebra_apply(&pres, &m, &xs)?;
            Ok(Outcome::ok(json!({ "outputs": out.iter().map(|e| dist_json(e.rep())).collect::<Vec<_>>() })))
        }
    }
}

/// Set functor schema: `{"sets": {obj: [..]}, "maps": {morphism: {x: y}}}`.
fn load_functor(cat: &Arc<FiniteCategory>, path: &Path) -> std::result::Result<SetFunctor, Failure> {
    let value: Value = load(path)?;
    let field = |k: &str| value.get(k).cloned().unwrap_or(Value::Null);
    let bad = |e: serde_json::Error| Failure::Input(format!("{}: {e}", path.display()));
    let sets: BTreeMap<String, Vec<String>> = serde_json::from_value(field("sets")).map_err(bad)?;
    let mut maps: BTreeMap<String, BTreeMap<String, String>> = serde_json::from_value(field("maps")).map_err(bad)?;
    // Identities may be left out.
    for (obj, elems) in &sets {
        maps.entry(cat.identity(obj).to_string()).or_insert_with(|| elems.iter().map(|x| (x.clone(), x.clone())).collect());
    }
    Ok(SetFunctor::new(cat.clone(), sets, maps)?)
}

fn run_groth(category: &Path, functor: &Path, convex: bool, g: &Global) -> Run {
    let cat = Arc::new(FiniteCategory::from_json(&read(category)?)?);
    let f = load_functor(&cat, functor)?;
    let p = grothendieck(&f)?;
    let discrete = is_discrete_fibration(&p);
    let back = extract_functor(&p)?;
    let unit = is_natural_isomorphism(&f, &back, &unit_isomorphism(&f));
    let counit = is_fibration_isomorphism(&counit_functor(&p)?, &grothendieck(&back)?, &p);
    let mut result = json!({
        "total": p.total().to_json(),
        "discrete_fibration": discrete,
        "unit_isomorphism": unit,
        "counit_isomorphism": counit,
    });
    let mut passed = discrete && unit && counit;
    if convex {
        let cf = CSetFunctor::free_on(&f)?;
        let agrees = convex_grothendieck(&cf).extract(g.bound)?.agrees_with(&cf, g.bound)?;
        result["convex_round_trip"] = json!(agrees);
        passed &= agrees;
    }
    Ok(Outcome::checked(passed, result))
}

fn run_omon(choice: FunctorChoice, instances: Option<&Path>, star: Option<&str>, g: &Global) -> Run {
    let f = match choice {
        FunctorChoice::Dist => dist_lax_functor(Arc::new(FinCoproduct::new(3)))?,
        FunctorChoice::Max => max_lax_functor(Arc::new(MaxOrder::new(3)), OperadKind::Comm)?,
    };
    let instances = match instances {
        Some(path) => Instance::from_json(&read(path)?)?,
        None => {
            let ops: Vec<Operation> = match choice {
                FunctorChoice::Dist => qconv_grid(4, 3).into_iter().map(Operation::QConv).collect(),
                FunctorChoice::Max => (1..=3).map(Operation::Comm).collect(),
            };
            sample_instances(f.category(), &ops)
        }
    };
    let lax = check_lax(&f, &instances, g.bound);
    let total = o_grothendieck(&f, g.bound);
    let mut failing = Vec::new();
    for inst in &instances {
        let report = total.check_instance(inst)?;
        if !report.passed() {
            failing.push(serde_json::to_value(&report).expect("report serializes"));
        }
    }
    let mut result = json!({
        "instances": instances.len(),
        "lax": serde_json::to_value(&lax).expect("report serializes"),
        "total_failures": failing,
    });
    if let Some(w) = star {
        let alpha = QConvOp::new(weights(w)?)?;
        let xs: Vec<Arc<Presentation>> =
            (0..alpha.arity()).map(|i| Arc::new(Presentation::free([format!("x{i}"), format!("y{i}")]).expect("two generators"))).collect();
        let s = star_alpha(&alpha, &xs)?;
        result["star"] = json!({ "generators": s.presentation().generators(), "kept": s.kept() });
    }
    Ok(Outcome::checked(lax.passed() && failing.is_empty(), result))
}

fn run_entropy(action: &EntropyAction, g: &Global) -> Run {
    match action {
        EntropyAction::Verify { corpus, candidate } => {
            let corpus = match corpus {
                Some(p) => Corpus::from_json(&read(p)?)?,
                None => generate_corpus(g.seed, 50, 8),
            };
            let cand = match candidate.strip_prefix("custom-table:") {
                Some(file) => Candidate::table_from_json(&read(Path::new(file))?)?,
                None => Candidate::parse(candidate)?,
            };
            let report = verify_entropy_axioms(&cand, &corpus, g.tol);
            Ok(Outcome::checked(report.passed(), serde_json::to_value(&report).expect("report serializes")).with(ERRATUM_SIGN))
        }
        EntropyAction::Generate { count, max_carrier } => Ok(Outcome::ok(generate_corpus(g.seed, *count, *max_carrier).to_json())),
        EntropyAction::Value { weights: ws } => {
            let p = ProbObject::new(ws.iter().map(|w| parse_rational(w)).collect::<convexion_core::Result<_>>()?)?;
            Ok(Outcome::ok(json!({ "entropy": shannon_entropy(&p), "sign_convention": SIGN_CONVENTION })))
        }
    }
}

fn parse_group(spec: &str, top: usize) -> std::result::Result<SimplicialAbelianGroup, Failure> {
    let (kind, m) = spec.split_once(':').ok_or_else(|| Failure::Input(format!("bad group {spec:?}")))?;
    let m: u64 = m.parse().map_err(|_| Failure::Input(format!("bad modulus in {spec:?}")))?;
    Ok(match kind {
        "constant" => SimplicialAbelianGroup::constant(m, top)?,
        "nerve" => SimplicialAbelianGroup::nerve_of_cyclic(m, top)?,
        _ => return Err(Failure::Input(format!("unknown group {kind:?}"))),
    })
}

fn run_twist(simplicial: &Path, group: &str, eta: &Path, other: Option<&Path>) -> Run {
    let x = Arc::new(TruncatedSimplicialSet::from_json(&read(simplicial)?)?);
    let k = Arc::new(parse_group(group, x.dim())?);
    let e1 = TwistingFunction::from_json(&read(eta)?, &k, &x)?;
    let e2 = match other {
        Some(p) => TwistingFunction::from_json(&read(p)?, &k, &x)?,
        None => TwistingFunction::zero(&k, &x),
    };
    let b1 = Arc::new(twisted_product(&k, &e1, &x)?);
    let b2 = Arc::new(twisted_product(&k, &e2, &x)?);
    let t = bundle_tensor(&b1, &b2)?;
    let sum = e1.add(&e2, &k);
    let target = twisted_product(&k, &sum, &x)?;
    let addition = is_bundle_isomorphism(&t, &target, &twisted_sum_map(&t, &target)?);
    let principal = b1.principal_violations().is_empty() && b2.principal_violations().is_empty();
    let mut result = json!({
        "principal": principal,
        "tensor_is_sum": addition,
        "sum": sum.to_json(&k),
    });
    let mut passed = principal && addition;
    match (some_distribution(&b1), some_distribution(&b2)) {
        (Some(p), Some(q)) => {
            let mu = mu_product(&p, &q, &t)?;
            let report = check_simplicial_distribution(&mu, &t);
            let monoid = TwistMonoid::new(k.clone(), x.clone());
            let unit = monoid.unit()?;
            let graded = convexion_core::simplicial::Graded { eta: e1.clone(), bundle: b1.clone(), p };
            let unit_ok = TwistMonoid::same(&monoid.multiply(&unit, &graded)?, &graded);
            passed &= report.passed() && unit_ok;
            result["mu"] = json!({ "valid": report.passed(), "failures": report.failures, "unit_law": unit_ok });
        }
        _ => result["mu"] = json!({ "skipped": "a bundle carries no simplicial distribution" }),
    }
    Ok(Outcome::checked(passed, result).with(ERRATUM_PRODUCT))
}

fn selfcheck(g: &Global) -> Run {
    let ce = counterexample(g)?;
    let mut laws = Vec::new();
    let ops: Vec<QConvOp> = (1..=3).flat_map(|n| grid(n, 3)).map(|w| QConvOp::new(w).expect("convex")).collect();
    for a in &ops {
        let m = a.as_matrix();
        for b in &ops {
            if b.arity() == 1 {
                continue;
            }
            // A 1×n row after an n×1 column is a 1×1 convex matrix.
            let col = Matrix::new(b.arity(), 1, vec![vec![Rational::new(1.into(), 1.into())]; b.arity()])?;
            let c = b.as_matrix().compose(&col)?;
            if !c.is_convex() || !m.direct_sum(&b.as_matrix()).is_convex() {
                laws.push(format!("{a:?}, {b:?}"));
            }
            let lhs = qconv_compose(a, &vec![b.clone(); a.arity()])?;
            let rhs = qconv_compose(b, &vec![a.clone(); b.arity()])?;
            let (m1, n1) = (a.arity(), b.arity());
            let sigma: Vec<usize> = (0..m1 * n1).map(|k| (k % n1) * m1 + k / n1).collect();
            if rhs.permute(&sigma)? != lhs {
                laws.push(format!("bisymmetry {a:?}, {b:?}"));
            }
        }
    }
    let pres = Arc::new(Presentation::free(["a", "b"])?);
    let half = [Rational::new(1.into(), 2.into()), Rational::new(1.into(), 2.into())];
    let mid = quotient_mix(&half, &[pres.generator("a")?, pres.generator("b")?])?;
    let swap = induce_map(&pres, &pres, &[("a".to_string(), pres.generator("b")?), ("b".to_string(), pres.generator("a")?)].into_iter().collect(), g.bound)?;
    let fixed = eq(&swap.evaluate(&mid)?, &mid, g.bound)?.is_equal();
    let mixed_maps = hom_combine(&half, &[swap.clone(), ConvexMap::identity(&pres)])?;
    let constant = eq(&mixed_maps.evaluate(&pres.generator("a")?)?, &mid, g.bound)?.is_equal();
    let passed = ce.passed && laws.is_empty() && fixed && constant;
    Ok(Outcome {
        passed,
        result: json!({ "counterexample": ce.result, "prop_law_failures": laws, "presented_checks": fixed && constant }),
        errata: ce.errata,
    })
}

/// The report envelope: sorted keys, canonical rationals.
pub fn envelope(verb: &str, g: &Global, outcome: &Outcome) -> Value {
    json!({
        "version": VERSION,
        "command": verb,
        "bound": g.bound,
        "errata": outcome.errata,
        "passed": outcome.passed,
        "result": outcome.result,
    })
}

pub fn verb_name(verb: &Verb) -> &'static str {
    match verb {
        Verb::Dist { .. } => "dist",
        Verb::Eq { .. } => "eq",
        Verb::Join { .. } => "join",
        Verb::Tensor { .. } => "tensor",
        Verb::Prop { .. } => "prop",
        Verb::Groth { .. } => "groth",
        Verb::Omon { .. } => "omon",
        Verb::Entropy { .. } => "entropy",
        Verb::Twist { .. } => "twist",
        Verb::Selfcheck => "selfcheck",
    }
}

/// Runs a command line and returns the exit status, printing the report.
pub fn main_with(args: impl IntoIterator<Item = String>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            let report = envelope(verb_name(&cli.verb), &cli.global, &outcome);
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            // A closed pipe is not an error worth reporting.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            if let Some(path) = &cli.global.report {
                if let Err(e) = fs::write(path, format!("{text}\n")) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return 2;
                }
            }
            if outcome.passed {
                0
            } else {
                1
            }
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}
