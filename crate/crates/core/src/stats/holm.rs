use crate::error::{Error, Result};

/// Holm step-down adjustment, returned in input order.
///
/// Sorting is stable and the running maximum makes tied raw p-values land
/// on identical adjusted values.
pub fn holm_adjust(p_raw: &[f64]) -> Result<Vec<f64>> {
    if let Some(&bad) = p_raw.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidProbability(bad));
    }
    let m = p_raw.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_raw[a].total_cmp(&p_raw[b]));

    let mut adjusted = vec![0.0; m];
    let mut running = 0.0_f64;
    for (rank, &idx) in order.iter().enumerate() {
        let scaled = ((m - rank) as f64 * p_raw[idx]).min(1.0);
        running = running.max(scaled);
        adjusted[idx] = running;
    }
    Ok(adjusted)
}
