/// Indices selected by [`find_peaks`], best first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeakPick {
    pub indices: Vec<usize>,
    /// Fewer than the requested number of local maxima exist.
    pub underdetected: bool,
}

/// All local maxima of `values`, in index order.
///
/// A run of equal values is a maximum when both outer neighbours are strictly
/// lower; an endpoint only needs to beat its single neighbour. A plateau is
/// reported at its leftmost index.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    let mut out = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end + 1 < n && values[end + 1] == values[start] {
            end += 1;
        }
        let left_ok = start == 0 || values[start - 1] < values[start];
        let right_ok = end + 1 == n || values[end + 1] < values[start];
        if left_ok && right_ok {
            out.push(start);
        }
        start = end + 1;
    }
    out
}

/// Sorts candidate indices by value, descending; ties go to the smaller index.
pub(crate) fn rank_by_value(values: &[f64], indices: &mut [usize]) {
    indices.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
}

/// The `k` largest local maxima of `values`.
pub fn find_peaks(values: &[f64], k: usize) -> PeakPick {
    let mut idx = local_maxima(values);
    rank_by_value(values, &mut idx);
    let underdetected = idx.len() < k;
    idx.truncate(k);
    PeakPick {
        indices: idx,
        underdetected,
    }
}
