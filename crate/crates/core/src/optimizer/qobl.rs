//! Quasi-oppositional sampling.

use rand::Rng;

use super::population::HawkPopulation;
use super::{Bounds, Evaluator, Problem};
use crate::error::Result;

/// Opposite point `a + b - x` per component.
pub fn opposite(x: &[f64], bounds: Bounds<'_>) -> Vec<f64> {
    x.iter()
        .zip(bounds.lower.iter().zip(bounds.upper))
        .map(|(&v, (&a, &b))| a + b - v)
        .collect()
}

/// Quasi-opposite point from explicit uniforms in `[0, 1)`: each component
/// lies between the interval center and the opposite coordinate.
pub fn quasi_opposite_with(x: &[f64], bounds: Bounds<'_>, uniforms: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(bounds.lower.iter().zip(bounds.upper))
        .zip(uniforms)
        .map(|((&v, (&a, &b)), &u)| {
            let center = (a + b) / 2.0;
            let opp = a + b - v;
            let q = center + u * (opp - center);
            q.clamp(center.min(opp), center.max(opp))
        })
        .collect()
}

pub fn quasi_opposite<R: Rng + ?Sized>(x: &[f64], bounds: Bounds<'_>, rng: &mut R) -> Vec<f64> {
    let uniforms: Vec<f64> = (0..x.len()).map(|_| rng.random()).collect();
    quasi_opposite_with(x, bounds, &uniforms)
}

/// Replaces each hawk by its quasi-opposite point when that improves fitness.
pub(crate) fn qobl_pass<P: Problem + ?Sized, R: Rng + ?Sized>(
    population: &mut HawkPopulation,
    bounds: Bounds<'_>,
    rng: &mut R,
    eval: &mut Evaluator<'_, P>,
) -> Result<()> {
    for i in 0..population.len() {
        let candidate = quasi_opposite(&population.positions[i], bounds, rng);
        let f = eval.eval(&candidate)?;
        population.offer(i, candidate, f);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn b<'a>(lo: &'a [f64], hi: &'a [f64]) -> Bounds<'a> {
        Bounds { lower: lo, upper: hi }
    }

    #[test]
    fn substitution_examples() {
        let (lo, hi) = ([0.0], [10.0]);
        assert_eq!(opposite(&[2.0], b(&lo, &hi)), vec![8.0]);
        let mut r = rng::stream(5);
        for _ in 0..1000 {
            let q = quasi_opposite(&[2.0], b(&lo, &hi), &mut r)[0];
            assert!((5.0..=8.0).contains(&q));
        }

        let (lo, hi) = ([-1.0], [1.0]);
        assert_eq!(opposite(&[1.0], b(&lo, &hi)), vec![-1.0]);
        for _ in 0..1000 {
            let q = quasi_opposite(&[1.0], b(&lo, &hi), &mut r)[0];
            assert!((-1.0..=0.0).contains(&q));
        }
    }

    #[test]
    fn center_is_a_fixed_point() {
        let (lo, hi) = ([2.0, -4.0], [6.0, 0.0]);
        let x = [4.0, -2.0];
        assert_eq!(opposite(&x, b(&lo, &hi)), x.to_vec());
        let q = quasi_opposite(&x, b(&lo, &hi), &mut rng::stream(0));
        assert_eq!(q, x.to_vec());
    }

    #[test]
    fn explicit_uniforms_hit_endpoints() {
        let (lo, hi) = ([0.0], [10.0]);
        assert_eq!(quasi_opposite_with(&[2.0], b(&lo, &hi), &[0.0]), vec![5.0]);
        assert_eq!(quasi_opposite_with(&[2.0], b(&lo, &hi), &[0.5]), vec![6.5]);
    }
}
