//! Piecewise-constant input signals.

use crate::error::{AfdError, Result};

/// A piecewise-constant input over `[0, T]`: segment `k` holds `values[k]`
/// on `[breakpoints[k], breakpoints[k+1])`, the last segment running to the
/// end of the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSchedule {
    breakpoints: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl InputSchedule {
    /// Builds a schedule. Breakpoints must start at 0 and be strictly
    /// increasing, with one value vector per breakpoint.
    pub fn new(breakpoints: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(AfdError::InvalidArgument(format!(
                "schedule needs matching breakpoints and values, got {} and {}",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints[0] != 0.0 {
            return Err(AfdError::InvalidArgument(format!(
                "first breakpoint must be 0, got {}",
                breakpoints[0]
            )));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(AfdError::InvalidArgument(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        let dim = values[0].len();
        if dim == 0 || values.iter().any(|v| v.len() != dim) {
            return Err(AfdError::InvalidArgument(
                "all segment values must share one nonzero input dimension".into(),
            ));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(AfdError::InvalidArgument(
                "schedule values must be finite".into(),
            ));
        }
        Ok(InputSchedule {
            breakpoints,
            values,
        })
    }

    /// A single segment holding `u` from time 0 on.
    pub fn constant(u: Vec<f64>) -> Self {
        InputSchedule::new(vec![0.0], vec![u]).expect("constant schedule is always valid")
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn segment_count(&self) -> usize {
        self.values.len()
    }

    pub fn input_dim(&self) -> usize {
        self.values[0].len()
    }

    /// Input vector active at time `t` (segments are left-closed).
    pub fn value_at(&self, t: f64) -> &[f64] {
        let idx = match self
            .breakpoints
            .binary_search_by(|b| b.partial_cmp(&t).expect("finite breakpoints"))
        {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        };
        &self.values[idx]
    }

    /// Splits `[t0, t1]` at interior breakpoints, yielding
    /// `(start, end, segment value)` pieces with constant input on each.
    pub fn pieces_in(&self, t0: f64, t1: f64) -> Vec<(f64, f64, &[f64])> {
        let mut cuts = vec![t0];
        for &b in &self.breakpoints {
            if b > t0 && b < t1 {
                cuts.push(b);
            }
        }
        cuts.push(t1);
        cuts.windows(2)
            .map(|w| (w[0], w[1], self.value_at(w[0])))
            .collect()
    }

    /// True iff every segment value lies inside the closed `input_box`.
    pub fn within_box(&self, input_box: &[(f64, f64)]) -> bool {
        self.values.iter().all(|u| {
            u.len() == input_box.len()
                && u.iter()
                    .zip(input_box)
                    .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_uses_left_closed_segments() {
        let s = InputSchedule::new(vec![0.0, 10.0, 20.0], vec![vec![1.0], vec![2.0], vec![3.0]])
            .unwrap();
        assert_eq!(s.value_at(0.0), &[1.0]);
        assert_eq!(s.value_at(9.999), &[1.0]);
        assert_eq!(s.value_at(10.0), &[2.0]);
        assert_eq!(s.value_at(25.0), &[3.0]);
        assert_eq!(s.segment_count(), 3);
    }

    #[test]
    fn pieces_split_at_interior_breakpoints() {
        let s = InputSchedule::new(vec![0.0, 10.0], vec![vec![1.0], vec![2.0]]).unwrap();
        let pieces = s.pieces_in(5.0, 15.0);
        assert_eq!(pieces.len(), 2);
        assert_eq!(pieces[0], (5.0, 10.0, &[1.0][..]));
        assert_eq!(pieces[1], (10.0, 15.0, &[2.0][..]));
    }

    #[test]
    fn rejects_bad_breakpoints() {
        assert!(InputSchedule::new(vec![1.0], vec![vec![0.0]]).is_err());
        assert!(InputSchedule::new(vec![0.0, 0.0], vec![vec![0.0], vec![0.0]]).is_err());
        assert!(InputSchedule::new(vec![0.0], vec![vec![f64::NAN]]).is_err());
    }

    #[test]
    fn box_check_is_elementwise() {
        let s = InputSchedule::constant(vec![0.5, 0.0]);
        assert!(s.within_box(&[(0.0, 1.0), (0.0, 1.0)]));
        assert!(!s.within_box(&[(0.0, 0.4), (0.0, 1.0)]));
    }
}
