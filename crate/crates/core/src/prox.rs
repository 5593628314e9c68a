//! Proximal mappings of PARs.
//!
//! `prox_{lambda psi}(x) = argmin_z lambda psi(z) + (z - x)^2 / 2`.
//!
//! Closed forms exist for the convex, quasiconvex-uniform and
//! nonconvex-nearest families. [`prox_oracle`] is an independent exhaustive
//! search over every affine piece of psi and serves as ground truth.
//!
//! Where the prox is set-valued the output is chosen deterministically: the
//! smaller `|z|` wins, then the smaller `z`.

use crate::error::{ParoError, Result};
use crate::par::{round_half_toward_zero, Family, ParSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxResult {
    pub point: f64,
    /// `lambda psi(point) + (x - point)^2 / 2`
    pub objective: f64,
    /// Signed level index when `point` is exactly a quantization level:
    /// `+-k` for `+-q_k` in symmetric families, the list position for
    /// nonconvex-nearest.
    pub at_level: Option<i64>,
}

/// Objective of the scalar prox subproblem.
pub fn prox_objective(par: &ParSpec, lambda: f64, x: f64, z: f64) -> f64 {
    let pen = if lambda == 0.0 { 0.0 } else { lambda * par.value(z) };
    pen + 0.5 * (x - z) * (x - z)
}

/// Signed index of `z` in the quantization set, if `z` is a level.
pub fn level_index(par: &ParSpec, z: f64) -> Option<i64> {
    if !par.is_level(z) {
        return None;
    }
    let signed = |k: usize| if z < 0.0 { -(k as i64) } else { k as i64 };
    match par.family() {
        Family::QuasiconvexUniform => {
            let gap = par.gap().expect("staircase has a gap");
            Some(signed(round_half_toward_zero(z.abs() / gap) as usize))
        }
        Family::NonconvexNearest => {
            let levels = par.levels().expect("nearest has levels");
            levels.iter().position(|&q| q == z).map(|i| i as i64)
        }
        Family::Convex | Family::General => {
            let levels = par.levels().expect("table has levels");
            levels.iter().position(|&q| q == z.abs()).map(signed)
        }
    }
}

fn finish(par: &ParSpec, lambda: f64, x: f64, z: f64) -> ProxResult {
    ProxResult {
        point: z,
        objective: prox_objective(par, lambda, x, z),
        at_level: level_index(par, z),
    }
}

fn check_inputs(lambda: f64, x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(ParoError::NonFinite("prox input x"));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(ParoError::NonFinite("prox weight lambda must be finite and >= 0"));
    }
    Ok(())
}

// Bands on u = |x| >= 0 are contiguous: snap to q_k on
// [q_k + mu a_{k-1}, q_k + mu a_k], slide by mu a_k on the gap up to the next
// snap band. `start(k)` is the left end of the k-th snap band.
fn convex_magnitude(levels: &[f64], slopes: &[f64], mu: f64, u: f64) -> f64 {
    let m = levels.len() - 1;
    let start = |k: usize| {
        if k == 0 {
            0.0
        } else {
            levels[k] + mu * slopes[k - 1]
        }
    };
    let (mut lo, mut hi) = (0usize, m + 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if start(mid) <= u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let k = lo;
    if u <= levels[k] + mu * slopes[k] {
        levels[k]
    } else {
        u - mu * slopes[k]
    }
}

fn staircase_magnitude(gap: f64, mu: f64, u: f64) -> f64 {
    if mu >= gap {
        // hard quantizer
        let k = round_half_toward_zero((u - 0.5 * mu) / gap).max(0.0);
        return k * gap;
    }
    let k = (u / gap).floor();
    let r = u - k * gap;
    if r <= mu {
        k * gap
    } else if r <= 0.5 * gap + 0.5 * mu {
        u - mu
    } else {
        u
    }
}

fn tie_break(a: f64, b: f64) -> f64 {
    if a.abs() < b.abs() {
        a
    } else if b.abs() < a.abs() {
        b
    } else {
        a.min(b)
    }
}

fn nearest_point(levels: &[f64], lambda: f64, x: f64) -> f64 {
    let first = levels[0];
    let last = levels[levels.len() - 1];
    if x <= first {
        return (x + lambda).min(first);
    }
    if x >= last {
        return (x - lambda).max(last);
    }
    let i = levels.partition_point(|&q| q <= x) - 1;
    let (a, b) = (levels[i], levels[i + 1]);
    let mid = 0.5 * (a + b);
    let left = (x - lambda).clamp(a, mid);
    let right = (x + lambda).clamp(mid, b);
    if x < mid {
        left
    } else if x > mid {
        right
    } else {
        tie_break(left, right)
    }
}

/// Closed-form scalar prox. Errors for the general family.
pub fn prox_scalar(par: &ParSpec, lambda: f64, x: f64) -> Result<ProxResult> {
    check_inputs(lambda, x)?;
    if lambda == 0.0 {
        return Ok(finish(par, 0.0, x, x));
    }
    let z = match par.family() {
        Family::Convex => {
            let levels = par.levels().expect("convex PAR has levels");
            let slopes = par.slopes().expect("convex PAR has slopes");
            convex_magnitude(levels, slopes, lambda, x.abs()).copysign(x)
        }
        Family::QuasiconvexUniform => {
            let gap = par.gap().expect("staircase has a gap");
            let mu = lambda * par.height().expect("staircase has a height");
            let mag = staircase_magnitude(gap, mu, x.abs());
            if mag == 0.0 {
                0.0
            } else {
                mag.copysign(x)
            }
        }
        Family::NonconvexNearest => {
            nearest_point(par.levels().expect("nearest has levels"), lambda, x)
        }
        Family::General => return Err(ParoError::NoClosedForm(Family::General.name())),
    };
    let z = if z == 0.0 { 0.0 } else { z };
    Ok(finish(par, lambda, x, z))
}

/// Exhaustive minimization over every affine piece of psi within a working
/// radius; each piece contributes its clamped unconstrained minimizer and
/// both endpoints.
pub fn prox_oracle(par: &ParSpec, lambda: f64, x: f64) -> ProxResult {
    if lambda == 0.0 {
        return finish(par, 0.0, x, x);
    }
    let reach = match par.max_level() {
        Some(m) => m + par.max_gap(),
        None => 2.0 * par.max_gap(),
    };
    let radius = x.abs() + lambda * par.a_max() + reach;
    search_pieces(par, lambda, x, -radius, radius)
}

fn search_pieces(par: &ParSpec, lambda: f64, x: f64, lo: f64, hi: f64) -> ProxResult {
    let mut best: Option<(f64, f64)> = None;
    for piece in par.pieces(lo, hi) {
        let inner = (x - lambda * piece.slope).clamp(piece.lo, piece.hi);
        for z in [inner, piece.lo, piece.hi] {
            if !z.is_finite() {
                continue;
            }
            let obj = lambda * (piece.slope * z + piece.offset) + 0.5 * (x - z) * (x - z);
            best = Some(match best {
                None => (z, obj),
                Some((bz, bobj)) => {
                    let scale = 1e-14 * bobj.abs().max(1.0);
                    if obj < bobj - scale {
                        (z, obj)
                    } else if obj <= bobj + scale && tie_break(z, bz) == z && z != bz {
                        (z, obj.min(bobj))
                    } else {
                        (bz, bobj)
                    }
                }
            });
        }
    }
    let (z, _) = best.expect("working radius always intersects the domain");
    let z = if z == 0.0 { 0.0 } else { z };
    finish(par, lambda, x, z)
}

/// Exact prox for any family: closed form when available, otherwise a
/// piece search restricted to `|z - x| <= 2 lambda a_max` (outside that
/// window the objective exceeds its value at `z = x`).
pub fn prox_any(par: &ParSpec, lambda: f64, x: f64) -> Result<ProxResult> {
    match prox_scalar(par, lambda, x) {
        Err(ParoError::NoClosedForm(_)) => {}
        other => return other,
    }
    let w = 2.0 * lambda * par.a_max() * (1.0 + 1e-12) + 1e-12;
    let res = search_pieces(par, lambda, x, x - w, x + w);
    Ok(res)
}

/// Coordinate-wise closed-form prox.
pub fn prox_vector(par: &ParSpec, lambda: f64, x: &[f64]) -> Result<Vec<f64>> {
    x.iter()
        .map(|&xi| prox_scalar(par, lambda, xi).map(|r| r.point))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::par::{build_par, par_approx_classic, ClassicTarget};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn convex_example() -> ParSpec {
        build_par(&[0.0, 1.0, 2.0], &[0.2, 1.0, f64::INFINITY], Family::Convex).unwrap()
    }

    fn quasi() -> ParSpec {
        ParSpec::quasiconvex_uniform(1.0, 1.0).unwrap()
    }

    fn pm1() -> ParSpec {
        ParSpec::nonconvex_nearest(&[-1.0, 1.0]).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let r = prox_scalar(&convex_example(), 0.5, 1.3).unwrap();
        assert_eq!(r.point, 1.0);
        assert_eq!(r.at_level, Some(1));
        assert_eq!(prox_oracle(&convex_example(), 0.5, 1.3).point, 1.0);

        assert_eq!(prox_scalar(&quasi(), 2.0, 2.4).unwrap().point, 1.0);
        assert_eq!(prox_oracle(&quasi(), 2.0, 2.4).point, 1.0);

        assert_abs_diff_eq!(prox_scalar(&quasi(), 0.5, 1.8).unwrap().point, 1.8);
        assert_abs_diff_eq!(prox_oracle(&quasi(), 0.5, 1.8).point, 1.8, epsilon = 1e-12);

        assert_abs_diff_eq!(prox_scalar(&pm1(), 0.2, -0.7).unwrap().point, -0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(prox_oracle(&pm1(), 0.2, -0.7).point, -0.9, epsilon = 1e-15);

        for par in [convex_example(), quasi(), pm1(), ParSpec::l1()] {
            assert_eq!(prox_scalar(&par, 0.0, 0.37).unwrap().point, 0.37);
        }
    }

    #[test]
    fn oracle_examples() {
        assert_abs_diff_eq!(prox_oracle(&ParSpec::l1(), 1.0, 1.7).point, 0.7, epsilon = 1e-15);
        assert_eq!(prox_oracle(&pm1(), 1.5, 0.3).point, 1.0);
        assert_eq!(prox_oracle(&pm1(), 1.5, 0.0).point, -1.0);
        assert_eq!(prox_scalar(&pm1(), 1.5, 0.0).unwrap().point, -1.0);
    }

    #[test]
    fn general_family_has_no_closed_form() {
        let sqrt = par_approx_classic(ClassicTarget::Sqrt, 0.5, 3.0).unwrap();
        assert!(matches!(
            prox_scalar(&sqrt, 0.3, 1.0),
            Err(ParoError::NoClosedForm(_))
        ));
        assert!(prox_any(&sqrt, 0.3, 1.0).is_ok());
    }

    #[test]
    fn vector_examples() {
        let x = [1.7, -0.4, 0.0];
        assert_eq!(prox_vector(&ParSpec::l1(), 0.0, &x).unwrap(), x.to_vec());
        let out = prox_vector(&ParSpec::l1(), 1.0, &x).unwrap();
        assert_abs_diff_eq!(out[0], 0.7, epsilon = 1e-15);
        assert_eq!(&out[1..], &[0.0, 0.0]);
        assert_eq!(
            prox_vector(&convex_example(), 0.5, &[1.3, -1.3]).unwrap(),
            vec![1.0, -1.0]
        );
    }

    #[test]
    fn objective_field_matches_value() {
        let par = quasi();
        for x in [-2.3, -0.1, 0.6, 1.9] {
            let r = prox_scalar(&par, 0.4, x).unwrap();
            let direct = 0.4 * par.value(r.point) + 0.5 * (x - r.point).powi(2);
            assert_abs_diff_eq!(r.objective, direct, epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_non_finite() {
        assert!(prox_scalar(&ParSpec::l1(), 1.0, f64::NAN).is_err());
        assert!(prox_scalar(&ParSpec::l1(), -1.0, 1.0).is_err());
    }

    #[test]
    fn regime_boundaries_agree_with_oracle() {
        // lambda exactly at q (quasiconvex) and at half the gap (nonconvex)
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let x: f64 = rng.random_range(-4.0..4.0);
            let a = prox_scalar(&quasi(), 1.0, x).unwrap();
            let b = prox_oracle(&quasi(), 1.0, x);
            assert!((a.objective - b.objective).abs() < 1e-12, "x={x}");
            let a = prox_scalar(&pm1(), 1.0, x).unwrap();
            let b = prox_oracle(&pm1(), 1.0, x);
            assert!((a.objective - b.objective).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn segment_search_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sqrt = par_approx_classic(ClassicTarget::Sqrt, 0.1, 3.0).unwrap();
        for _ in 0..3000 {
            let lambda: f64 = rng.random_range(0.0..1.5);
            let x: f64 = rng.random_range(-4.0..4.0);
            let a = prox_any(&sqrt, lambda, x).unwrap();
            let b = prox_oracle(&sqrt, lambda, x);
            assert!((a.objective - b.objective).abs() <= 1e-12, "x={x} lambda={lambda}");
        }
    }

    mod props {
        use super::*;
        use crate::par::strategies::{convex_par, nearest_par, staircase_par};
        use proptest::prelude::*;

        fn any_closed_form_par() -> impl Strategy<Value = ParSpec> {
            prop_oneof![convex_par(), staircase_par(), nearest_par()]
        }

        // distinct outputs are only allowed when both are minimizers
        fn agrees(a: ProxResult, b: ProxResult) -> bool {
            (a.point - b.point).abs() <= 1e-8
                || (a.objective - b.objective).abs() <= 1e-10 * a.objective.abs().max(1.0)
        }

        proptest! {
            #[test]
            fn closed_form_matches_oracle(par in any_closed_form_par(), lambda in 0.0f64..3.0, x in -6.0f64..6.0) {
                let a = prox_scalar(&par, lambda, x).unwrap();
                let b = prox_oracle(&par, lambda, x);
                prop_assert!(agrees(a, b), "{:?} vs {:?}", a, b);
                prop_assert!(a.objective <= b.objective + 1e-10 * b.objective.abs().max(1.0));
            }

            #[test]
            fn odd_for_symmetric(par in prop_oneof![convex_par(), staircase_par()], lambda in 0.0f64..3.0, x in -6.0f64..6.0) {
                let p = prox_scalar(&par, lambda, x).unwrap();
                let m = prox_scalar(&par, lambda, -x).unwrap();
                let mirrored = ProxResult { point: -m.point, ..m };
                prop_assert!(agrees(p, mirrored));
            }

            #[test]
            fn convex_nonexpansive(par in convex_par(), lambda in 0.0f64..3.0, x in -6.0f64..6.0, y in -6.0f64..6.0) {
                let px = prox_scalar(&par, lambda, x).unwrap().point;
                let py = prox_scalar(&par, lambda, y).unwrap().point;
                prop_assert!((px - py).abs() <= (x - y).abs() + 1e-12);
                prop_assert!(px.abs() <= x.abs() + 1e-12);
            }

            #[test]
            fn staircase_shrinks(par in staircase_par(), lambda in 0.0f64..3.0, x in -6.0f64..6.0) {
                prop_assert!(prox_scalar(&par, lambda, x).unwrap().point.abs() <= x.abs());
            }

            #[test]
            fn convex_monotone_in_lambda(par in convex_par(), l1 in 0.0f64..3.0, dl in 0.0f64..3.0, x in -6.0f64..6.0) {
                let a = prox_scalar(&par, l1, x).unwrap().point.abs();
                let b = prox_scalar(&par, l1 + dl, x).unwrap().point.abs();
                prop_assert!(a + 1e-12 >= b);
            }

            #[test]
            fn hard_quantizer_regimes(par in prop_oneof![staircase_par(), nearest_par()], extra in 0.0f64..2.0, x in -6.0f64..6.0) {
                let lambda = match par.family() {
                    Family::QuasiconvexUniform => par.gap().unwrap() / par.height().unwrap(),
                    _ => 0.5 * par.max_gap(),
                } * (1.0 + extra);
                let x = match par.levels() {
                    Some(q) if par.family() == Family::NonconvexNearest => {
                        let (lo, hi) = (q[0], q[q.len() - 1]);
                        lo + (hi - lo) * (x + 6.0) / 12.0
                    }
                    _ => x,
                };
                let r = prox_scalar(&par, lambda, x).unwrap();
                prop_assert!(r.at_level.is_some(), "{:?}", r);
                if par.family() == Family::NonconvexNearest {
                    prop_assert_eq!(r.point, par.nearest_level(x));
                }
            }
        }
    }
}
