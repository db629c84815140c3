#![allow(dead_code)]

use hhc_core::fixtures::{guard_rail, GuardRailOptions};
use hhc_core::preprocess::InducedCase;
use hhc_core::{Instance, SyncType};
use rand::Rng;

/// Random oriented quadruple on horizon `t`. An orientation is impossible
/// with probability 0.2 and unbounded above with probability 0.25.
pub fn random_quad(rng: &mut impl Rng, t: i64) -> [i64; 4] {
    let mut side = || {
        if rng.random_bool(0.2) {
            return (t, t);
        }
        let lo = rng.random_range(0..t);
        let hi = if rng.random_bool(0.25) { t } else { rng.random_range(lo..=t) };
        (lo, hi)
    };
    let (a, b) = side();
    let (c, d) = side();
    [a, b, c, d]
}

/// `t_second - t_first` may take `x` under the given half of a quadruple.
fn in_band(x: i64, min: i64, max: i64, t: i64) -> bool {
    min < t && x >= min && (max >= t || x <= max)
}

/// Differences `t_w - t_u` with `|d| < t` reachable by integer starts with
/// the given orientations, found by enumeration.
pub fn reachable_differences(quad_uv: [i64; 4], quad_vw: [i64; 4], p_uv: bool, p_vw: bool, t: i64) -> Vec<bool> {
    let mut hit = vec![false; (2 * t - 1) as usize];
    let tu = 2 * t;
    for tv in 0..=4 * t {
        let ok_uv = if p_uv {
            in_band(tv - tu, quad_uv[0], quad_uv[1], t)
        } else {
            in_band(tu - tv, quad_uv[2], quad_uv[3], t)
        };
        if !ok_uv {
            continue;
        }
        for tw in 0..=4 * t {
            let ok_vw = if p_vw {
                in_band(tw - tv, quad_vw[0], quad_vw[1], t)
            } else {
                in_band(tv - tw, quad_vw[2], quad_vw[3], t)
            };
            let d = tw - tu;
            if ok_vw && d.abs() < t {
                hit[(d + t - 1) as usize] = true;
            }
        }
    }
    hit
}

/// Differences with `|d| < t` admitted by a table row.
pub fn admitted_differences(case: &InducedCase, t: i64) -> Vec<bool> {
    let inside = |x: i64, (lo, hi): (i64, i64)| (lo, hi) != (t, t) && x >= lo && x <= hi;
    (-(t - 1)..t).map(|d| (d >= 0 && inside(d, case.forward)) || (d <= 0 && inside(-d, case.reverse))).collect()
}

/// Mismatching differences of one row, empty when the row is exact.
pub fn row_mismatches(quad_uv: [i64; 4], quad_vw: [i64; 4], case: &InducedCase, t: i64) -> Vec<i64> {
    let brute = reachable_differences(quad_uv, quad_vw, case.p_uv, case.p_vw, t);
    let table = admitted_differences(case, t);
    (0..brute.len()).filter(|&i| brute[i] != table[i]).map(|i| i as i64 - (t - 1)).collect()
}

/// Guard-rail instance shapes: `(originals, splittable)` with at most six
/// visits in total.
pub const SHAPES: [(usize, usize); 6] = [(4, 0), (5, 0), (6, 0), (4, 1), (3, 1), (2, 2)];

/// Deterministic guard-rail candidates cycling over shapes and the type of
/// the first dependency.
pub fn guard_rail_candidates(count: usize) -> Vec<(Instance, SyncType)> {
    (0..count as u64)
        .map(|seed| {
            let (originals, splittable) = SHAPES[seed as usize % SHAPES.len()];
            let kind = SyncType::ALL[(seed / SHAPES.len() as u64) as usize % SyncType::ALL.len()];
            let opts = GuardRailOptions {
                originals,
                splittable,
                caregivers: 3,
                dependencies: 1 + (seed % 2) as usize,
                sync_type: Some(kind),
                ..GuardRailOptions::default()
            };
            (guard_rail(1000 + seed, &opts), kind)
        })
        .collect()
}
