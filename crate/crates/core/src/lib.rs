//! Computational verification of Birch--Swinnerton-Dyer data for CM elliptic curves.
//!
//! The library combines three layers:
//!
//! * exact arithmetic in imaginary quadratic fields K = Q(sqrt(D)) --- elements,
//!   fractional ideals in Hermite normal form, class groups and their characters
//!   ([`qfield`]);
//! * exact arithmetic of elliptic curves over Q and over class-number-one K ---
//!   minimal models, Tate's algorithm, torsion, point counts, Hecke characters
//!   attached to CM curves ([`curve`], [`cm`]);
//! * high-precision analytic data --- L-values by smoothed sums, period lattices
//!   by the arithmetic-geometric mean ([`lfun`], [`periods`]);
//!
//! which [`bsd`] assembles into numerical checks of the classical BSD formula
//! over Q, of its K-equivariant ideal-theoretic refinement, and of Gross's class
//! number formula for |Sha| of the CM abelian variety A(p).
//!
//! All exact arithmetic is GMP-backed (`rug::Integer`, `rug::Rational`); all
//! analytic arithmetic is MPFR-backed at caller-chosen precision with explicit
//! error accounting.

pub mod arith;
pub mod bsd;
pub mod cm;
pub mod curve;
pub mod hp;
pub mod lfun;
pub mod periods;
pub mod qfield;

/// Errors surfaced by the exact and analytic layers.
///
/// Fallible operations distinguish *input* errors (non-fundamental
/// discriminants, singular curves, mixed fields...) from *outcome* errors
/// (recognition failures, undetermined root numbers) so that callers can map
/// them onto the PASS / non-verdict / UNRECOGNIZED report vocabulary.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("not a fundamental discriminant of an imaginary quadratic field: {0}")]
    NotFundamental(i64),
    #[error("discriminant out of the supported range: {0}")]
    DiscTooLarge(i64),
    #[error("elements belong to different quadratic fields ({0} vs {1})")]
    MixedFields(i64, i64),
    #[error("singular Weierstrass equation (discriminant zero)")]
    SingularCurve,
    #[error("model is not integral at {0}; integralize before running Tate's algorithm")]
    NotIntegral(String),
    #[error("model is not minimal at {0}; run the minimal-model reduction first")]
    NotMinimal(String),
    #[error("curve has no complex multiplication by a supported order")]
    NoCm,
    #[error("CM order is non-maximal (discriminant {0}); the equivariant path requires the maximal order")]
    NonMaximalOrder(i64),
    #[error("class number of K is {0}, but this operation requires class number one")]
    ClassNumberNotOne(u64),
    #[error("base field mismatch: curve has CM by discriminant {cm}, base change requested to {base}")]
    WrongBaseField { cm: i64, base: i64 },
    #[error("failed to recognize {0} as an exact algebraic quantity within the denominator bound")]
    Recognition(String),
    #[error("root number undetermined: functional-equation residuals ambiguous")]
    RootNumberUnknown,
    #[error("torsion order over K undetermined: saturation stalled between {lower} and {upper}")]
    TorsionUndetermined { lower: u64, upper: u64 },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("invalid input: {0}")]
    BadInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
