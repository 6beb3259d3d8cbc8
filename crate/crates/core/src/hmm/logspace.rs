//! Log-domain helpers shared by the inference routines.

/// Stand-in for `ln 0`. Finite so that sums of impossible terms stay comparable.
pub const LOG_FLOOR: f64 = -1e30;

#[inline]
pub fn ln_or_floor(p: f64) -> f64 {
    if p > 0.0 {
        p.ln().max(LOG_FLOOR)
    } else {
        LOG_FLOOR
    }
}

#[inline]
pub fn clamp_floor(x: f64) -> f64 {
    if x < LOG_FLOOR {
        LOG_FLOOR
    } else {
        x
    }
}

/// `ln(sum(exp(xs)))`, treating anything at or below [`LOG_FLOOR`] as zero mass.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max <= LOG_FLOOR {
        return LOG_FLOOR;
    }
    let sum: f64 = xs
        .iter()
        .filter(|&&x| x > LOG_FLOOR)
        .map(|&x| (x - max).exp())
        .sum();
    clamp_floor(max + sum.ln())
}

/// Streaming accumulator for `log_sum_exp` that avoids allocating a buffer.
#[derive(Debug, Clone, Copy)]
pub struct LogSumAcc {
    max: f64,
    sum: f64,
}

impl Default for LogSumAcc {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumAcc {
    pub fn new() -> Self {
        LogSumAcc {
            max: LOG_FLOOR,
            sum: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        if x <= LOG_FLOOR {
            return;
        }
        if x > self.max {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        } else {
            self.sum += (x - self.max).exp();
        }
    }

    pub fn value(&self) -> f64 {
        if self.sum == 0.0 {
            LOG_FLOOR
        } else {
            clamp_floor(self.max + self.sum.ln())
        }
    }
}

/// Index of the maximum, lowest index on ties.
pub fn argmax(xs: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &x) in xs.iter().enumerate() {
        match best {
            Some((_, b)) if x <= b => {}
            _ => best = Some((i, x)),
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lse_matches_direct_sum() {
        let xs = [-1.0, -2.5, -0.3];
        let direct: f64 = xs.iter().map(|x: &f64| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&xs) - direct).abs() < 1e-14);
        let mut acc = LogSumAcc::new();
        xs.iter().for_each(|&x| acc.add(x));
        assert!((acc.value() - direct).abs() < 1e-14);
    }

    #[test]
    fn floor_terms_carry_no_mass() {
        assert_eq!(log_sum_exp(&[LOG_FLOOR, LOG_FLOOR]), LOG_FLOOR);
        assert!((log_sum_exp(&[LOG_FLOOR, 0.0]) - 0.0).abs() < 1e-15);
        assert_eq!(LogSumAcc::new().value(), LOG_FLOOR);
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0, 2.0]), Some(1));
        assert_eq!(argmax(&[]), None);
    }
}
