/// Cyclic repetition of the codeword to `target_len` positions,
/// `r_i = l_{((i-1) mod L)+1}`. When `target_len < L` the tail of the
/// codeword is not transmitted.
pub fn rate_match(bits: &[u8], target_len: usize) -> Vec<u8> {
    assert!(!bits.is_empty(), "rate matching needs a non-empty codeword");
    bits.iter().copied().cycle().take(target_len).collect()
}

/// Inverse of [`rate_match`] for soft values: every received LLR is added
/// to the codeword position it repeats. Positions never transmitted stay 0.
pub fn derate_match(llrs: &[f64], coded_len: usize) -> Vec<f64> {
    let mut acc = vec![0.0; coded_len];
    for (i, v) in llrs.iter().enumerate() {
        acc[i % coded_len] += v;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repetition_pattern() {
        let l = [1u8, 2, 3, 4];
        assert_eq!(rate_match(&l, 6), vec![1, 2, 3, 4, 1, 2]);
        assert_eq!(rate_match(&l, 4), l.to_vec());
        assert_eq!(rate_match(&l, 8), [l, l].concat());
        assert_eq!(rate_match(&l, 3), vec![1, 2, 3]);
    }

    #[test]
    fn accumulation_sums_repeats() {
        let v = 0.37;
        let n = 5;
        let acc = derate_match(&vec![v; 4 * n], 4);
        let mut exact = 0.0;
        for _ in 0..n {
            exact += v;
        }
        assert!(acc.iter().all(|a| *a == exact));
        assert_eq!(derate_match(&[1.0, 2.0], 3), vec![1.0, 2.0, 0.0]);
    }
}
