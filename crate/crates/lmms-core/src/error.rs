//! Error types shared across the crate. Hand-rolled enums with `Display`
//! so the crate stays no_std; the CLI layer wraps them as needed.

/// Structural problems: shapes, labels, indices, non-finite numbers.
/// Axiom violations are *not* errors — they are reported by `space::validate`.
#[derive(Clone, Debug, PartialEq)]
pub enum StructuralError {
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    NonFiniteEntry {
        what: &'static str,
        index: usize,
    },
    DuplicateLabel(alloc::string::String),
    IndexOutOfRange {
        got: usize,
        n: usize,
    },
    /// One-point compactification of a space that already has a boundary.
    AlreadyBounded,
    ParameterRange {
        what: &'static str,
        got: f64,
    },
}

impl core::fmt::Display for StructuralError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            StructuralError::LengthMismatch {
                what,
                expected,
                got,
            } => write!(f, "{what}: expected length {expected}, got {got}"),
            StructuralError::NonFiniteEntry { what, index } => {
                write!(f, "{what} at index {index} is not finite")
            }
            StructuralError::DuplicateLabel(l) => write!(f, "duplicate label {l:?}"),
            StructuralError::IndexOutOfRange { got, n } => {
                write!(f, "index {got} out of range for {n} points")
            }
            StructuralError::AlreadyBounded => {
                write!(f, "space already has a spacelike boundary point")
            }
            StructuralError::ParameterRange { what, got } => {
                write!(f, "parameter {what} = {got} outside its valid range")
            }
        }
    }
}

impl core::error::Error for StructuralError {}

/// Errors from coupling construction and gluing.
#[derive(Clone, Debug, PartialEq)]
pub enum CouplingError {
    Shape {
        expected: (usize, usize),
        got: (usize, usize),
    },
    NegativeMass {
        i: usize,
        j: usize,
        value: f64,
    },
    MarginalMismatch {
        side: &'static str,
        index: usize,
        expected: f64,
        got: f64,
    },
    NonFinite {
        i: usize,
        j: usize,
    },
}

impl core::fmt::Display for CouplingError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CouplingError::Shape { expected, got } => write!(
                f,
                "coupling shape {}x{} does not match weights {}x{}",
                got.0, got.1, expected.0, expected.1
            ),
            CouplingError::NegativeMass { i, j, value } => {
                write!(f, "coupling entry ({i},{j}) = {value} is negative")
            }
            CouplingError::MarginalMismatch {
                side,
                index,
                expected,
                got,
            } => write!(
                f,
                "{side} marginal {index}: sum {got} does not match weight {expected}"
            ),
            CouplingError::NonFinite { i, j } => {
                write!(f, "coupling entry ({i},{j}) is not finite")
            }
        }
    }
}

impl core::error::Error for CouplingError {}

/// Errors from distance solvers.
#[derive(Clone, Debug, PartialEq)]
pub enum SolveError {
    /// The exact method is only available at tiny sizes.
    TooLargeForExact { n: usize, m: usize, cap: usize },
    /// A parameter (p, q, lambda, ...) is outside its domain.
    ParameterRange { what: &'static str, got: f64 },
    /// Enumeration would exceed a hard cap (e.g. matrix-law tuples).
    EnumerationCap { needed: u128, cap: u128 },
}

impl core::fmt::Display for SolveError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SolveError::TooLargeForExact { n, m, cap } => write!(
                f,
                "exact method limited to {cap} points per side, got {n}x{m}"
            ),
            SolveError::ParameterRange { what, got } => {
                write!(f, "parameter {what} = {got} outside its valid range")
            }
            SolveError::EnumerationCap { needed, cap } => {
                write!(f, "enumeration needs {needed} items, cap is {cap}")
            }
        }
    }
}

impl core::error::Error for SolveError {}
