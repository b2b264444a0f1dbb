use super::group::Flavor;
use super::setup::HeckeCase;

/// `log_q [J w J : J]` for an alternating word `w` in `s_1, s_2` (cases c, d)
/// as given by the coset lemmas. `None` for non-alternating words or case a.
pub fn lemma_index_exponent(case: HeckeCase, flavor: Flavor, word: &[u8]) -> Option<u32> {
    if word.windows(2).any(|w| w[0] == w[1]) || word.iter().any(|&i| i != 1 && i != 2) {
        return None;
    }
    let l = word.len() as u32;
    if l == 0 {
        return Some(0);
    }
    let even = l % 2 == 0;
    let starts_one = word[0] == 1;
    Some(match (case, flavor) {
        (HeckeCase::C, Flavor::JPrime) => l,
        (HeckeCase::C, Flavor::J) if even => 2 * l,
        (HeckeCase::C, Flavor::J) if starts_one => 2 * l - 1,
        (HeckeCase::C, Flavor::J) => 2 * l + 1,
        (HeckeCase::D, Flavor::JPrime) if even => l,
        (HeckeCase::D, Flavor::JPrime) if starts_one => l - 1,
        (HeckeCase::D, Flavor::JPrime) => l + 1,
        (HeckeCase::D, Flavor::J) if even => 3 * l,
        (HeckeCase::D, Flavor::J) if starts_one => 3 * l - 1,
        (HeckeCase::D, Flavor::J) => 3 * l + 1,
        (HeckeCase::A, _) => return None,
    })
}

/// `log_q [J zeta^t J : J]` in case a; `J'` is normalized by `zeta`.
pub fn zeta_index_exponent(flavor: Flavor, t: i32) -> u32 {
    match flavor {
        Flavor::J => 4 * t.unsigned_abs(),
        Flavor::JPrime => 0,
    }
}

/// The alternating words `(s_1 s_2)^t`, `(s_1 s_2)^t s_1`, `(s_2 s_1)^t`,
/// `(s_2 s_1)^t s_2` for `t` in `0..=t_max`.
pub fn alternating_words(t_max: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for t in 0..=t_max {
        for (a, b) in [(1u8, 2u8), (2, 1)] {
            let base: Vec<u8> = (0..2 * t).map(|i| if i % 2 == 0 { a } else { b }).collect();
            if t > 0 || a == 1 {
                out.push(base.clone());
            }
            let mut odd = base;
            odd.push(a);
            out.push(odd);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_list() {
        let w = alternating_words(1);
        assert_eq!(w, vec![vec![], vec![1], vec![2], vec![1, 2], vec![1, 2, 1], vec![2, 1], vec![2, 1, 2]]);
    }

    #[test]
    fn generator_values() {
        assert_eq!(lemma_index_exponent(HeckeCase::C, Flavor::J, &[2]), Some(3));
        assert_eq!(lemma_index_exponent(HeckeCase::D, Flavor::J, &[2]), Some(4));
        assert_eq!(lemma_index_exponent(HeckeCase::D, Flavor::JPrime, &[1]), Some(0));
        assert_eq!(lemma_index_exponent(HeckeCase::C, Flavor::J, &[1, 1]), None);
    }
}
