use crate::dataset::MAX_SCORE;
use crate::error::{Error, Result};

/// `|Y / 10 - S|` expressed in percent.
pub fn absolute_error(score: f64, similarity: f64) -> Result<f64> {
    if !(0.0..=MAX_SCORE).contains(&score) {
        return Err(Error::Range(format!("judgment {score} outside [0, 10]")));
    }
    if !(0.0..=1.0).contains(&similarity) {
        return Err(Error::Range(format!("similarity {similarity} outside [0, 1]")));
    }
    Ok((score / MAX_SCORE - similarity).abs() * 100.0)
}

/// Mean error of one pair over the judges that scored it.
pub fn mean_error_per_pair(errors: &[f64]) -> Result<f64> {
    mean(errors)
}

/// Mean error of one judge over the pairs they scored.
pub fn mean_error_per_user(errors: &[f64]) -> Result<f64> {
    mean(errors)
}

fn mean(xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Mean computed over the sorted values, so the result does not depend on
/// the order the values were produced in.
pub(crate) fn order_free_mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let mut v: Vec<f64> = values.into_iter().collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    Some(v.iter().sum::<f64>() / v.len() as f64)
}
