//! Longest common subsequence over arbitrary equatable items.

/// Index pairs `(i, j)` of one longest common subsequence, ascending in both
/// coordinates. Among equally long alignments the backtrack prefers matching
/// later items of `a` first, which makes the result deterministic.
pub fn lcs_pairs<T: PartialEq>(a: &[T], b: &[T]) -> Vec<(usize, usize)> {
    let prefix = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    let a_rest = &a[prefix..];
    let b_rest = &b[prefix..];
    let suffix = a_rest.iter().rev().zip(b_rest.iter().rev()).take_while(|(x, y)| x == y).count();
    let a_mid = &a_rest[..a_rest.len() - suffix];
    let b_mid = &b_rest[..b_rest.len() - suffix];

    let mut out: Vec<(usize, usize)> = (0..prefix).map(|i| (i, i)).collect();
    out.extend(lcs_table(a_mid, b_mid).into_iter().map(|(i, j)| (i + prefix, j + prefix)));
    let (a_tail, b_tail) = (a.len() - suffix, b.len() - suffix);
    out.extend((0..suffix).map(|k| (a_tail + k, b_tail + k)));
    out
}

pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { cur[j].max(prev[j + 1]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn lcs_table<T: PartialEq>(a: &[T], b: &[T]) -> Vec<(usize, usize)> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let width = b.len() + 1;
    let mut dp = vec![0u32; (a.len() + 1) * width];
    for i in 0..a.len() {
        for j in 0..b.len() {
            dp[(i + 1) * width + j + 1] =
                if a[i] == b[j] { dp[i * width + j] + 1 } else { dp[i * width + j + 1].max(dp[(i + 1) * width + j]) };
        }
    }
    let mut out = Vec::with_capacity(dp[a.len() * width + b.len()] as usize);
    let (mut i, mut j) = (a.len(), b.len());
    while i > 0 && j > 0 {
        if a[i - 1] == b[j - 1] && dp[i * width + j] == dp[(i - 1) * width + j - 1] + 1 {
            out.push((i - 1, j - 1));
            i -= 1;
            j -= 1;
        } else if dp[(i - 1) * width + j] >= dp[i * width + j - 1] {
            i -= 1;
        } else {
            j -= 1;
        }
    }
    out.reverse();
    out
}
