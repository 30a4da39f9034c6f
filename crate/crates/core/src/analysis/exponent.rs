use crate::alphabet::Symbol;
use crate::automata::Gambler;
use crate::weight::Weight;

use super::chain::StationaryInfo;

/// `alpha_r = sum_a mu(a) ln gamma(r, a)` for every state; `-inf` when a
/// letter of positive probability has a zero bet.
pub fn state_exponents<W: Weight>(g: &Gambler<W>) -> Vec<f64> {
    let mu = g.measure().weights();
    (0..g.dfa().states())
        .map(|r| {
            mu.iter()
                .enumerate()
                .filter(|(_, m)| !m.is_zero())
                .map(|(a, m)| m.to_f64() * g.log_bet(r, a as Symbol))
                .sum()
        })
        .collect()
}

/// `sum_r pi_r alpha_r`: the almost-sure rate of log capital on IID input.
/// States with `pi_r = 0` contribute nothing even when `alpha_r = -inf`.
pub fn expected_decay_exponent<W: Weight>(g: &Gambler<W>, info: &StationaryInfo) -> f64 {
    state_exponents(g)
        .into_iter()
        .zip(&info.pi)
        .filter(|(_, &p)| p > 0.0)
        .map(|(a, &p)| p * a)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::analysis::{build_chain, stationary};
    use crate::automata::Dfa;
    use crate::measure::uniform_measure;

    #[test]
    fn known_exponents() {
        let mu = uniform_measure(Alphabet::binary());
        let one = Dfa::new(Alphabet::binary(), 0, vec![vec![0, 0]]).unwrap();
        let info = stationary(&build_chain(&one, &mu).unwrap());
        let trivial = Gambler::new(one.clone(), vec![vec![1.0, 1.0]], mu.clone()).unwrap();
        assert_eq!(expected_decay_exponent(&trivial, &info), 0.0);
        let g = Gambler::new(one, vec![vec![1.5, 0.5]], mu.clone()).unwrap();
        let e = expected_decay_exponent(&g, &info);
        assert!((e - (-0.143841036225890463720)).abs() < 1e-12);

        let two = Dfa::new(Alphabet::binary(), 0, vec![vec![0, 1], vec![0, 0]]).unwrap();
        let info = stationary(&build_chain(&two, &mu).unwrap());
        let g = Gambler::new(two, vec![vec![1.0, 1.0], vec![1.5, 0.5]], mu).unwrap();
        let e = expected_decay_exponent(&g, &info);
        assert!((e - (-0.0479470120752968212399)).abs() < 1e-12);
    }

    #[test]
    fn zero_bet_on_visited_state_is_minus_infinity() {
        let mu = uniform_measure(Alphabet::binary());
        let one = Dfa::new(Alphabet::binary(), 0, vec![vec![0, 0]]).unwrap();
        let info = stationary(&build_chain(&one, &mu).unwrap());
        let g = Gambler::new(one, vec![vec![2.0, 0.0]], mu).unwrap();
        assert_eq!(expected_decay_exponent(&g, &info), f64::NEG_INFINITY);
    }
}
