//! Per-iteration statistics with separate upper and lower deviations.
//!
//! For samples `x` at one iteration with mean `μ`, the upper deviation is the
//! mean of `x - μ` over samples `x ≥ μ` and the lower deviation is the mean of
//! `μ - x` over samples `x < μ`. An empty subset gives 0.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StatsError {
    #[error("no traces to aggregate")]
    Empty,
    #[error("trace {index} has length {len}, expected {expected}")]
    Ragged {
        index: usize,
        len: usize,
        expected: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatsPoint {
    /// Inner iteration, starting at 1.
    pub iteration: usize,
    pub mean: f64,
    pub sigma_upper: f64,
    pub sigma_lower: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsSeries {
    pub points: Vec<StatsPoint>,
}

impl StatsSeries {
    pub fn last(&self) -> Option<&StatsPoint> {
        self.points.last()
    }
}

/// Mean of a non-empty slice, summed in order and kept inside `[min, max]`.
pub fn mean(values: &[f64]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    (values.iter().sum::<f64>() / values.len() as f64).clamp(lo, hi)
}

fn point(iteration: usize, column: &[f64]) -> StatsPoint {
    let mu = mean(column);
    let (mut up, mut n_up, mut down, mut n_down) = (0.0, 0usize, 0.0, 0usize);
    for &x in column {
        if x >= mu {
            up += x - mu;
            n_up += 1;
        } else {
            down += mu - x;
            n_down += 1;
        }
    }
    let avg = |s: f64, n: usize| if n == 0 { 0.0 } else { s / n as f64 };
    StatsPoint {
        iteration,
        mean: mu,
        sigma_upper: avg(up, n_up),
        sigma_lower: avg(down, n_down),
        samples: column.len(),
    }
}

pub fn aggregate_statistics(traces: &[Vec<f64>]) -> Result<StatsSeries, StatsError> {
    let expected = traces.first().ok_or(StatsError::Empty)?.len();
    if let Some((index, t)) = traces.iter().enumerate().find(|(_, t)| t.len() != expected) {
        return Err(StatsError::Ragged {
            index,
            len: t.len(),
            expected,
        });
    }
    let mut column = Vec::with_capacity(traces.len());
    let points = (0..expected)
        .map(|t| {
            column.clear();
            column.extend(traces.iter().map(|tr| tr[t]));
            point(t + 1, &column)
        })
        .collect();
    Ok(StatsSeries { points })
}
