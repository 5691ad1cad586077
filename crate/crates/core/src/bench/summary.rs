use super::csv_io::TraceRow;
use super::{label_counts_inner, RunResult};

/// Per-algorithm aggregate over seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgoSummary {
    pub algo: String,
    pub runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub median_wall_ms: f64,
    pub iqr_wall_ms: f64,
    /// Inner iterations for prox-linear methods, iterations otherwise.
    pub median_total_iters: f64,
    pub median_main_iters: f64,
}

/// Median; the mean of the two middle values for even counts. NaN when empty.
pub fn median(values: &[f64]) -> f64 {
    quantile_linear(values, 0.5)
}

/// Interquartile range with linearly interpolated quartiles.
pub fn iqr(values: &[f64]) -> f64 {
    quantile_linear(values, 0.75) - quantile_linear(values, 0.25)
}

fn quantile_linear(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        v[lo]
    } else {
        // midpoint form keeps the even-count median symmetric
        let w = pos - lo as f64;
        if w == 0.5 {
            (v[lo] + v[hi]) / 2.0
        } else {
            v[lo] + w * (v[hi] - v[lo])
        }
    }
}

/// Final state of one run, the only input the summary needs.
struct RunEnd<'a> {
    algo: &'a str,
    rel_err: f64,
    wall_ms: f64,
    total: usize,
    main: usize,
}

fn aggregate(ends: &[RunEnd<'_>], eps: f64) -> Vec<AlgoSummary> {
    let mut order: Vec<&str> = Vec::new();
    for e in ends {
        if !order.contains(&e.algo) {
            order.push(e.algo);
        }
    }
    order
        .into_iter()
        .map(|algo| {
            let mine: Vec<&RunEnd<'_>> = ends.iter().filter(|e| e.algo == algo).collect();
            let successes = mine.iter().filter(|e| e.rel_err <= eps).count();
            let wall: Vec<f64> = mine.iter().map(|e| e.wall_ms).collect();
            let total: Vec<f64> = mine.iter().map(|e| e.total as f64).collect();
            let main: Vec<f64> = mine.iter().map(|e| e.main as f64).collect();
            AlgoSummary {
                algo: algo.to_string(),
                runs: mine.len(),
                successes,
                success_rate: successes as f64 / mine.len() as f64,
                median_wall_ms: median(&wall),
                iqr_wall_ms: iqr(&wall),
                median_total_iters: median(&total),
                median_main_iters: median(&main),
            }
        })
        .collect()
}

/// Summaries in order of first appearance of each algorithm.
pub fn summarize(runs: &[RunResult], eps: f64) -> Vec<AlgoSummary> {
    let ends: Vec<RunEnd<'_>> = runs
        .iter()
        .filter_map(|r| {
            let last = r.trace.last()?;
            Some(RunEnd {
                algo: &r.algo,
                rel_err: last.rel_err,
                wall_ms: last.wall_ms,
                total: r.total_iterations(),
                main: last.k,
            })
        })
        .collect();
    aggregate(&ends, eps)
}

/// Same as [`summarize`], from CSV rows. A run ends where `(seed, algo)`
/// changes.
pub fn summarize_rows(rows: &[TraceRow], eps: f64) -> Vec<AlgoSummary> {
    let mut ends = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let last = rows.get(i + 1).is_none_or(|next| next.seed != row.seed || next.algo != row.algo);
        if last {
            ends.push(RunEnd {
                algo: &row.algo,
                rel_err: row.rel_err,
                wall_ms: row.wall_ms,
                total: if label_counts_inner(&row.algo) { row.cum_inner } else { row.k },
                main: row.k,
            });
        }
    }
    aggregate(&ends, eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn even_median_is_midpoint() {
        assert_eq!(median(&[1.0, 2.0, 3.0, 4.0]), 2.5);
        let counts: Vec<f64> = [520.0, 522.0, 525.0, 527.0, 528.0, 529.0, 530.0, 531.0, 533.0, 540.0].to_vec();
        assert_eq!(median(&counts), 528.5);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn interquartile_range() {
        assert_eq!(iqr(&[1.0, 2.0, 3.0, 4.0, 5.0]), 2.0);
        assert_eq!(iqr(&[7.0]), 0.0);
        assert_eq!(iqr(&[1.0, 2.0, 3.0, 4.0]), 1.5);
    }
}
