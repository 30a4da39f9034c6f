use fsnormal::adversary::{find_minimal_divergent_word, DEFAULT_MAX_LEN, DEFAULT_TOLERANCE};
use fsnormal::generators::iid_stream;
use fsnormal::{Alphabet, BernoulliMeasure, RandomSource};

#[test]
fn iid_input_rarely_yields_a_witness() {
    for weights in [vec![0.5, 0.5], vec![0.25, 0.75]] {
        let mu = BernoulliMeasure::new(Alphabet::binary(), weights).unwrap();
        let hits = (0..100)
            .filter(|&seed| {
                let mut s = iid_stream(&mu, RandomSource::for_trial(99, seed));
                find_minimal_divergent_word(&mut s, &mu, 1_000_000, DEFAULT_TOLERANCE, DEFAULT_MAX_LEN)
                    .unwrap()
                    .is_some()
            })
            .count();
        assert!(hits <= 5, "{hits} false witnesses under {:?}", mu.weights());
    }
}
