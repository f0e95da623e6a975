//! Synthetic judgments matching published per-pair summary statistics.
//!
//! Scores are integers on the 0-10 scale. For each pair one score sits at
//! each end of the target range; the remaining scores are seeded from a
//! normal draw and then repaired by greedy unit moves until the sample mean
//! and standard deviation are within tolerance.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{sample_stats, Judgment, JudgmentDataset, MAX_SCORE};
use crate::error::{Error, Result};
use crate::ontology::ConceptId;

/// Tolerance on the recomputed mean and standard deviation.
pub const STAT_TOLERANCE: f64 = 0.15;

#[derive(Clone, Debug, PartialEq)]
pub struct TargetStats {
    pub pair_id: u32,
    pub c1: ConceptId,
    pub c2: ConceptId,
    /// Maximum minus minimum score.
    pub range: f64,
    pub sd: f64,
    pub mean: f64,
}

const RESTARTS: usize = 40;

pub fn synthesize_judgments(rows: &[TargetStats], n_users: usize, seed: u64) -> Result<JudgmentDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut judgments = Vec::with_capacity(rows.len() * n_users);
    for row in rows {
        let mut scores = synthesize_scores(row, n_users, &mut rng)?;
        scores.shuffle(&mut rng);
        judgments.extend(scores.into_iter().enumerate().map(|(u, score)| Judgment {
            pair_id: row.pair_id,
            c1: row.c1.clone(),
            c2: row.c2.clone(),
            user_id: u as u32,
            score,
        }));
    }
    JudgmentDataset::new(judgments)
}

fn infeasible(row: &TargetStats, reason: impl Into<String>) -> Error {
    Error::InfeasibleStats {
        pair_id: row.pair_id,
        reason: reason.into(),
    }
}

/// Scores for one pair, in no particular user order.
pub fn synthesize_scores(row: &TargetStats, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let TargetStats { range, sd, mean, .. } = *row;
    if n < 2 {
        return Err(infeasible(row, "need at least two judges"));
    }
    if !(0.0..=MAX_SCORE).contains(&mean) || sd < 0.0 || !(0.0..=MAX_SCORE).contains(&range) {
        return Err(infeasible(row, "statistics outside the 0-10 scale"));
    }
    if sd == 0.0 || range == 0.0 {
        if sd != 0.0 || range != 0.0 {
            return Err(infeasible(row, "zero spread requires both sd and range to be 0"));
        }
        return Ok(vec![mean; n]);
    }
    if range.fract() != 0.0 {
        return Err(infeasible(row, "integer scores need an integer range"));
    }
    let nf = n as f64;
    let half = (n / 2) as f64;
    let sd_max = range * (half * (nf - half) / (nf * (nf - 1.0))).sqrt();
    let sd_min = range / (2.0 * (nf - 1.0)).sqrt();
    if sd > sd_max + STAT_TOLERANCE || sd < sd_min - STAT_TOLERANCE {
        return Err(infeasible(
            row,
            format!("sd {sd} unreachable with range {range} over {n} scores ([{sd_min:.2}, {sd_max:.2}])"),
        ));
    }

    let r = range as i32;
    // Lower ends whose interval can contain the mean, closest-centred first.
    let mut lows: Vec<i32> = (0..=(MAX_SCORE as i32 - r))
        .filter(|&lo| (lo as f64) < mean && mean < (lo + r) as f64)
        .collect();
    lows.sort_by(|a, b| {
        let da = (*a as f64 + range / 2.0 - mean).abs();
        let db = (*b as f64 + range / 2.0 - mean).abs();
        da.total_cmp(&db).then(a.cmp(b))
    });
    if lows.is_empty() {
        return Err(infeasible(row, "mean cannot sit strictly inside the range"));
    }

    let seed_dist = Normal::new(mean, sd).expect("sd > 0");
    let mut best: Option<(f64, Vec<i32>)> = None;
    for attempt in 0..RESTARTS {
        let lo = lows[attempt % lows.len()];
        let hi = lo + r;
        let mut v = vec![lo, hi];
        v.extend((2..n).map(|_| (seed_dist.sample(rng).round() as i32).clamp(lo, hi)));
        // Nudge one interior draw so restarts explore different basins.
        if n > 2 {
            let k = rng.random_range(2..n);
            v[k] = rng.random_range(lo..=hi);
        }
        let loss = repair(&mut v, lo, hi, mean, sd);
        if best.as_ref().is_none_or(|(b, _)| loss < *b) {
            best = Some((loss, v));
        }
        if loss < 0.01 {
            break;
        }
    }
    let (_, v) = best.expect("at least one restart");
    let scores: Vec<f64> = v.into_iter().map(f64::from).collect();
    let (m, s, rg) = sample_stats(&scores);
    if (m - mean).abs() > STAT_TOLERANCE || (s - sd).abs() > STAT_TOLERANCE || rg != range {
        return Err(infeasible(
            row,
            format!("best attempt reached mean {m:.3}, sd {s:.3}, range {rg}"),
        ));
    }
    Ok(scores)
}

fn loss(v: &[i32], mean: f64, sd: f64) -> f64 {
    let xs: Vec<f64> = v.iter().map(|&x| f64::from(x)).collect();
    let (m, s, _) = sample_stats(&xs);
    ((m - mean) / STAT_TOLERANCE).powi(2) + ((s - sd) / STAT_TOLERANCE).powi(2)
}

/// Greedy unit moves on the interior scores (the two anchors stay put).
fn repair(v: &mut [i32], lo: i32, hi: i32, mean: f64, sd: f64) -> f64 {
    let mut current = loss(v, mean, sd);
    loop {
        let mut best_move = None;
        for i in 2..v.len() {
            for delta in [-1, 1] {
                let x = v[i] + delta;
                if x < lo || x > hi {
                    continue;
                }
                let old = v[i];
                v[i] = x;
                let l = loss(v, mean, sd);
                v[i] = old;
                if l < current - 1e-12 && best_move.is_none_or(|(_, _, bl)| l < bl) {
                    best_move = Some((i, x, l));
                }
            }
        }
        match best_move {
            Some((i, x, l)) => {
                v[i] = x;
                current = l;
            }
            None => return current,
        }
    }
}
