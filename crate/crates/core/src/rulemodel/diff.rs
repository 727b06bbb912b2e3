use std::ops::Range;

/// A maximal region where the two token sequences disagree. Either side
/// may be empty (pure insertion or deletion).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hunk {
    pub original: Range<usize>,
    pub perturbed: Range<usize>,
}

/// Longest-common-subsequence alignment of two token sequences.
/// Returns the LCS length and the differing hunks in order.
pub fn token_diff<T: PartialEq>(a: &[T], b: &[T]) -> (usize, Vec<Hunk>) {
    let (n, m) = (a.len(), b.len());
    // suffix table: lcs[i][j] = LCS of a[i..], b[j..]
    let mut lcs = vec![vec![0u32; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            lcs[i][j] = if a[i] == b[j] {
                lcs[i + 1][j + 1] + 1
            } else {
                lcs[i + 1][j].max(lcs[i][j + 1])
            };
        }
    }

    let mut hunks = Vec::new();
    let (mut i, mut j) = (0, 0);
    let mut open: Option<(usize, usize)> = None;
    while i < n || j < m {
        if i < n && j < m && a[i] == b[j] && lcs[i][j] == lcs[i + 1][j + 1] + 1 {
            if let Some((si, sj)) = open.take() {
                hunks.push(Hunk {
                    original: si..i,
                    perturbed: sj..j,
                });
            }
            i += 1;
            j += 1;
            continue;
        }
        open.get_or_insert((i, j));
        if j < m && (i == n || lcs[i][j + 1] >= lcs[i + 1][j]) {
            j += 1;
        } else {
            i += 1;
        }
    }
    if let Some((si, sj)) = open {
        hunks.push(Hunk {
            original: si..n,
            perturbed: sj..m,
        });
    }
    (lcs[0][0] as usize, hunks)
}

/// Whether the token range `span` overlaps one side of a hunk. An empty
/// side is an insertion point and touches spans with tokens on both sides
/// of it.
pub fn touches(span: &Range<usize>, side: &Range<usize>) -> bool {
    if side.is_empty() {
        span.start < side.start && side.start < span.end
    } else {
        span.start < side.end && side.start < span.end
    }
}
