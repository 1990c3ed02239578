//! Single byte-range requests (`Range: bytes=…`).

use std::ops::RangeInclusive;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RangeRequest {
    /// No usable range: serve the whole body.
    Full,
    Partial(RangeInclusive<u64>),
    /// Answer with 416.
    Unsatisfiable,
}

/// Interprets a `Range` header value against a body of `len` bytes.
/// Only one `bytes` range is supported; anything else is unsatisfiable.
pub fn parse(header: Option<&str>, len: u64) -> RangeRequest {
    let Some(raw) = header else {
        return RangeRequest::Full;
    };
    let Some(spec) = raw.trim().strip_prefix("bytes=") else {
        return RangeRequest::Unsatisfiable;
    };
    if spec.contains(',') {
        return RangeRequest::Unsatisfiable;
    }
    let Some((start, end)) = spec.trim().split_once('-') else {
        return RangeRequest::Unsatisfiable;
    };
    let number = |s: &str| -> Option<u64> {
        let s = s.trim();
        (!s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()))
            .then(|| s.parse().ok())
            .flatten()
    };
    let range = match (start.trim().is_empty(), end.trim().is_empty()) {
        // bytes=-N: the last N bytes
        (true, false) => match number(end) {
            Some(n) if n > 0 && len > 0 => Some(len.saturating_sub(n)..=len - 1),
            _ => None,
        },
        // bytes=A-
        (false, true) => match number(start) {
            Some(a) if a < len => Some(a..=len - 1),
            _ => None,
        },
        (false, false) => match (number(start), number(end)) {
            (Some(a), Some(b)) if a <= b && a < len => Some(a..=b.min(len - 1)),
            _ => None,
        },
        (true, true) => None,
    };
    range.map_or(RangeRequest::Unsatisfiable, RangeRequest::Partial)
}
