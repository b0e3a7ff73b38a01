use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("map is undefined on support element {0}")]
    UndefinedOnSupport(String),

    #[error("weights do not form a convex vector")]
    NotConvexVector,

    #[error("length mismatch: expected {expected}, got {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("elements belong to different presentations")]
    PresentationMismatch,

    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),

    #[error("relation {index} is violated: images are provably distinct")]
    RelationViolated { index: usize, lhs: String, rhs: String },

    #[error("relation {index} could not be decided within {bound} steps")]
    Undecided { index: usize, bound: usize },

    #[error("maps do not share source and target")]
    SignatureMismatch,

    #[error("maps do not share a target")]
    TargetMismatch,

    #[error("join point is missing its {0} part")]
    MissingPart(&'static str),

    #[error("tensor product of an empty factor list")]
    EmptyFactorList,

    #[error("element {0} does not belong to its tensor factor")]
    FactorMismatch(usize),

    #[error("arity mismatch: expected {expected}, got {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("permutation size mismatch: {0}")]
    SizeMismatch(String),

    #[error("matrix is not convex")]
    NotConvexMatrix,

    #[error("composition is not biconvex: {0}")]
    CompositionNotBiconvex(String),

    #[error("category laws fail: {0}")]
    NotACategory(String),

    #[error("not a functor: {0}")]
    NotAFunctor(String),

    #[error("not a discrete fibration: {0}")]
    NotAFibration(String),

    #[error("coherence failure: {0}")]
    CoherenceFailure(String),

    #[error("structure maps are not lax: {0}")]
    NotLax(String),

    #[error("structure map is not n-convex: {0}")]
    NotConvexStructureMap(String),

    #[error("map is not measure preserving: {0}")]
    NotMeasurePreserving(String),

    #[error("invalid simplicial data: {0}")]
    InvalidSimplicial(String),

    #[error("invalid twisting function: {0}")]
    InvalidTwist(String),

    #[error("bundles have different bases or groups")]
    BaseMismatch,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
