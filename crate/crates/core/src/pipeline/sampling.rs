use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Dimension, Requirement, SubspaceFilter};

use super::PipelineError;

/// The generator every sampling step uses.
pub type SampleRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a base seed with an operation-specific salt so successive
/// operations on one space draw different but reproducible streams.
pub fn derive_seed(base: u64, salt: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = base ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One label per dimension: pinned dimensions take their pinned label, the
/// rest a uniformly random member. Draws happen in dimension order, one per
/// unpinned dimension.
pub fn sample_requirement(
    dims: &[Dimension],
    pinned: &Requirement,
    rng: &mut impl Rng,
) -> Result<Requirement, PipelineError> {
    if dims.is_empty() {
        return Err(PipelineError::NoDimensions);
    }
    for (name, label) in pinned.iter() {
        match dims.iter().find(|d| d.name() == name) {
            None => {
                return Err(PipelineError::InvalidPin(format!(
                    "{name} is not a dimension of this space"
                )))
            }
            Some(d) if !d.contains(label) => {
                return Err(PipelineError::InvalidPin(format!(
                    "{label:?} is not a value of {name}"
                )))
            }
            Some(_) => {}
        }
    }
    Ok(dims
        .iter()
        .map(|dim| {
            let label = match pinned.get(dim.name()) {
                Some(label) => label.to_string(),
                None => pick(dim.labels().collect::<Vec<_>>(), rng),
            };
            (dim.name().to_string(), label)
        })
        .collect())
}

/// A requirement inside the filter's subspace: filtered dimensions draw
/// uniformly from their accepted labels (in the dimension's value order),
/// the others from all values.
pub fn sample_in_subspace(
    dims: &[Dimension],
    filter: &SubspaceFilter,
    rng: &mut impl Rng,
) -> Requirement {
    dims.iter()
        .map(|dim| {
            let candidates: Vec<&str> = match filter.selections.get(dim.name()) {
                Some(accepted) => dim.labels().filter(|l| accepted.contains(*l)).collect(),
                None => dim.labels().collect(),
            };
            (dim.name().to_string(), pick(candidates, rng))
        })
        .collect()
}

fn pick(candidates: Vec<&str>, rng: &mut impl Rng) -> String {
    candidates[rng.random_range(0..candidates.len())].to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims() -> Vec<Dimension> {
        vec![
            Dimension::nominal("Genre", ["A", "B"], 8).unwrap(),
            Dimension::nominal("Tone", ["X", "Y"], 8).unwrap(),
        ]
    }

    #[test]
    fn singleton_choice_is_forced() {
        let d = vec![Dimension::nominal("Genre", ["Fantasy", "Comedy"], 8).unwrap()];
        let req = sample_requirement(
            &d,
            &Requirement::new().with("Genre", "Fantasy"),
            &mut seeded(1),
        )
        .unwrap();
        assert_eq!(req, Requirement::new().with("Genre", "Fantasy"));
    }

    #[test]
    fn pinned_labels_hold_and_the_rest_is_uniform() {
        let pinned = Requirement::new().with("Tone", "Y");
        let mut rng = seeded(7);
        let mut a = 0;
        for _ in 0..1000 {
            let req = sample_requirement(&dims(), &pinned, &mut rng).unwrap();
            assert_eq!(req.get("Tone"), Some("Y"));
            if req.get("Genre") == Some("A") {
                a += 1;
            }
        }
        // Binomial(1000, 0.5): sigma = sqrt(250)
        let sigma = 250f64.sqrt();
        assert!((a as f64 - 500.0).abs() <= 4.0 * sigma, "A drawn {a} times");
    }

    #[test]
    fn same_seed_same_requirement() {
        let draw = || sample_requirement(&dims(), &Requirement::new(), &mut seeded(42)).unwrap();
        assert_eq!(draw(), draw());
    }

    #[test]
    fn invalid_pins_are_rejected() {
        for pin in [
            Requirement::new().with("Mood", "X"),
            Requirement::new().with("Tone", "Z"),
        ] {
            assert!(matches!(
                sample_requirement(&dims(), &pin, &mut seeded(0)),
                Err(PipelineError::InvalidPin(_))
            ));
        }
        assert!(matches!(
            sample_requirement(&[], &Requirement::new(), &mut seeded(0)),
            Err(PipelineError::NoDimensions)
        ));
    }

    #[test]
    fn subspace_draws_stay_inside_the_filter() {
        let filter = SubspaceFilter::new().select("Genre", ["B"]);
        let mut rng = seeded(3);
        for _ in 0..100 {
            let req = sample_in_subspace(&dims(), &filter, &mut rng);
            assert_eq!(req.get("Genre"), Some("B"));
            assert!(matches!(req.get("Tone"), Some("X" | "Y")));
        }
    }

    #[test]
    fn derived_seeds_differ_by_salt() {
        assert_ne!(derive_seed(1, 1), derive_seed(1, 2));
        assert_eq!(derive_seed(9, 4), derive_seed(9, 4));
    }
}
