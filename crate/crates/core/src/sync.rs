//! Synchronization types and their δ-quadruples.

use std::fmt;
use std::str::FromStr;

use crate::model::DependencySpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SyncType {
    /// Simultaneous start.
    Strict,
    /// Start difference within `[Δmin, Δmax]` in either order.
    LimitDifference,
    Overlap,
    NoOverlap,
    /// `u` must be completed before `v` starts.
    PrecedenceUV,
    PrecedenceVU,
    /// `u` first, start difference within `[Δmin, Δmax]`.
    OrderedLimitUV,
    OrderedLimitVU,
}

impl SyncType {
    pub const ALL: [SyncType; 8] = [
        SyncType::Strict,
        SyncType::LimitDifference,
        SyncType::Overlap,
        SyncType::NoOverlap,
        SyncType::PrecedenceUV,
        SyncType::PrecedenceVU,
        SyncType::OrderedLimitUV,
        SyncType::OrderedLimitVU,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SyncType::Strict => "strict",
            SyncType::LimitDifference => "limit-difference",
            SyncType::Overlap => "overlap",
            SyncType::NoOverlap => "no-overlap",
            SyncType::PrecedenceUV => "precedence-uv",
            SyncType::PrecedenceVU => "precedence-vu",
            SyncType::OrderedLimitUV => "ordered-limit-uv",
            SyncType::OrderedLimitVU => "ordered-limit-vu",
        }
    }

    pub fn takes_deltas(self) -> bool {
        matches!(self, SyncType::LimitDifference | SyncType::OrderedLimitUV | SyncType::OrderedLimitVU)
    }
}

impl fmt::Display for SyncType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SyncError {
    #[error("unknown synchronization type `{0}`")]
    UnknownType(String),
    #[error("delta_min {min} exceeds delta_max {max}")]
    InvertedDeltas { min: i64, max: i64 },
    #[error("negative delta or duration")]
    Negative,
}

impl FromStr for SyncType {
    type Err = SyncError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SyncType::ALL
            .iter()
            .copied()
            .find(|t| t.name() == s)
            .ok_or_else(|| SyncError::UnknownType(s.to_string()))
    }
}

/// The quadruple `(δ_uv^min, δ_uv^max, δ_vu^min, δ_vu^max)` for a pair, capped
/// at `horizon`.
pub fn sync_params(
    kind: SyncType,
    delta_min: i64,
    delta_max: i64,
    d_u: i64,
    d_v: i64,
    horizon: i64,
) -> Result<[i64; 4], SyncError> {
    if kind.takes_deltas() {
        if delta_min < 0 || delta_max < 0 {
            return Err(SyncError::Negative);
        }
        if delta_min > delta_max {
            return Err(SyncError::InvertedDeltas { min: delta_min, max: delta_max });
        }
    }
    if d_u < 0 || d_v < 0 {
        return Err(SyncError::Negative);
    }
    let t = horizon;
    let quad = match kind {
        SyncType::Strict => [0, 0, 0, 0],
        SyncType::LimitDifference => [delta_min, delta_max, delta_min, delta_max],
        SyncType::Overlap => [0, d_u, 0, d_v],
        SyncType::NoOverlap => [d_u, t, d_v, t],
        SyncType::PrecedenceUV => [d_u, t, t, t],
        SyncType::PrecedenceVU => [t, t, d_v, t],
        SyncType::OrderedLimitUV => [delta_min, delta_max, t, t],
        SyncType::OrderedLimitVU => [t, t, delta_min, delta_max],
    };
    Ok(quad.map(|x| x.min(t)))
}

/// Convenience constructor for a dependency between visits `a` and `b`.
#[allow(clippy::too_many_arguments)]
pub fn dependency(
    a: usize,
    b: usize,
    kind: SyncType,
    delta_min: i64,
    delta_max: i64,
    d_a: i64,
    d_b: i64,
    horizon: i64,
) -> Result<DependencySpec, SyncError> {
    let quad = sync_params(kind, delta_min, delta_max, d_a, d_b, horizon)?;
    Ok(DependencySpec::oriented(a, b, quad, horizon))
}

/// Whether exactly one direction is closed off (`δ_min = δ_max = T`), which
/// fixes the start order of the pair. Returns `Some(true)` if `u` goes first.
pub fn predetermined_order(dep: &DependencySpec, horizon: i64) -> Option<bool> {
    let uv_closed = dep.dmin_uv >= horizon && dep.dmax_uv >= horizon;
    let vu_closed = dep.dmin_vu >= horizon && dep.dmax_vu >= horizon;
    match (uv_closed, vu_closed) {
        (false, true) => Some(true),
        (true, false) => Some(false),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows() {
        assert_eq!(sync_params(SyncType::Strict, 0, 0, 30, 20, 540).unwrap(), [0, 0, 0, 0]);
        assert_eq!(sync_params(SyncType::NoOverlap, 0, 0, 30, 20, 540).unwrap(), [30, 540, 20, 540]);
        assert_eq!(sync_params(SyncType::PrecedenceUV, 0, 0, 30, 20, 540).unwrap(), [30, 540, 540, 540]);
        assert_eq!(sync_params(SyncType::PrecedenceVU, 0, 0, 30, 20, 540).unwrap(), [540, 540, 20, 540]);
        assert_eq!(sync_params(SyncType::Overlap, 0, 0, 30, 20, 540).unwrap(), [0, 30, 0, 20]);
        assert_eq!(sync_params(SyncType::LimitDifference, 5, 9, 30, 20, 540).unwrap(), [5, 9, 5, 9]);
        assert_eq!(sync_params(SyncType::OrderedLimitUV, 5, 9, 30, 20, 540).unwrap(), [5, 9, 540, 540]);
        assert_eq!(sync_params(SyncType::OrderedLimitVU, 5, 9, 30, 20, 540).unwrap(), [540, 540, 5, 9]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!("whatever".parse::<SyncType>(), Err(SyncError::UnknownType(_))));
        assert!(matches!(
            sync_params(SyncType::LimitDifference, 9, 5, 1, 1, 100),
            Err(SyncError::InvertedDeltas { .. })
        ));
    }

    #[test]
    fn names_round_trip() {
        for t in SyncType::ALL {
            assert_eq!(t.name().parse::<SyncType>().unwrap(), t);
        }
    }

    #[test]
    fn order_detection() {
        let dep = dependency(1, 2, SyncType::PrecedenceUV, 0, 0, 30, 20, 100).unwrap();
        assert_eq!(predetermined_order(&dep, 100), Some(true));
        let dep = dependency(2, 1, SyncType::PrecedenceUV, 0, 0, 30, 20, 100).unwrap();
        assert_eq!(predetermined_order(&dep, 100), Some(false));
        let dep = dependency(1, 2, SyncType::NoOverlap, 0, 0, 30, 20, 100).unwrap();
        assert_eq!(predetermined_order(&dep, 100), None);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn output_is_a_valid_quadruple(
                idx in 0usize..8, a in 0i64..200, b in 0i64..200,
                du in 1i64..100, dv in 1i64..100, t in 100i64..600,
            ) {
                let (lo, hi) = (a.min(b), a.max(b));
                let q = sync_params(SyncType::ALL[idx], lo, hi, du, dv, t).unwrap();
                prop_assert!(q.iter().all(|&x| (0..=t).contains(&x)));
                prop_assert!(q[0] <= q[1] && q[2] <= q[3]);
            }
        }
    }
}
