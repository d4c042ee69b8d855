use crate::codec::Base;

use super::{CollisionError, CollisionParams};

/// Minimum edit distance between `window` and any substring of `text`.
///
/// Full table: `D[0][j] = 0` (free start), `D[i][0] = i`, answer is the
/// minimum of the last row (free end).
pub fn window_min_distance(window: &[Base], text: &[Base]) -> usize {
    let m = window.len();
    let n = text.len();
    let mut prev: Vec<usize> = vec![0; n + 1];
    let mut cur: Vec<usize> = vec![0; n + 1];
    for i in 1..=m {
        cur[0] = i;
        for j in 1..=n {
            let sub = prev[j - 1] + usize::from(window[i - 1] != text[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev.into_iter().min().unwrap_or(m)
}

fn any_window(primer: &[Base], payload: &[Base], params: &CollisionParams) -> bool {
    primer
        .windows(params.window_len)
        .any(|w| window_min_distance(w, payload) <= params.max_edits)
}

/// Reference collision predicate.
pub fn collides_oracle(primer: &[Base], payload: &[Base], params: &CollisionParams) -> Result<bool, CollisionError> {
    params.validate()?;
    if params.window_len > primer.len() {
        return Err(CollisionError::WindowTooLong { window: params.window_len, primer: primer.len() });
    }
    if any_window(primer, payload, params) {
        return Ok(true);
    }
    if params.reverse_complement {
        let rc: Vec<Base> = primer.iter().rev().map(|b| b.complement()).collect();
        return Ok(any_window(&rc, payload, params));
    }
    Ok(false)
}
