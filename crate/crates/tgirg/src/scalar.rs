use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar the geometric core is generic over: f32 or f64.
///
/// Everything that touches coordinates, weights or thresholds goes through
/// this trait; the combinatorial layers (box graphs, BFS, Gray orders) are
/// scalar-free. Concrete aliases at the crate root fix `f64` for normal use.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + std::fmt::Debug
    + std::fmt::Display
    + std::fmt::LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to scalar")
    }
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
    fn from_usize_lossy(x: usize) -> Self {
        Self::from_usize(x).expect("usize converts to scalar")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Euclidean-style positive remainder: result is in [0, m) for m > 0.
pub fn wrap<F: Scalar>(x: F, m: F) -> F {
    let r = x - (x / m).floor() * m;
    // Guard the x/m rounding edge where r lands exactly on m.
    if r >= m {
        r - m
    } else {
        r
    }
}
