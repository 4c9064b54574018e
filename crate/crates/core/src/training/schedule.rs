//! Learning-rate schedule.

/// Learning-rate multiplier: linear warm-up from zero at the start of
/// training, and after each resampling event a cosine ramp from
/// `resample_lr_factor` back to 1 over `resample_warmup_steps`.
#[derive(Clone, Debug, PartialEq)]
pub struct LrSchedule {
    pub warmup_steps: usize,
    pub resample_lr_factor: f64,
    pub resample_warmup_steps: usize,
    pub last_resample: Option<usize>,
}

impl LrSchedule {
    pub fn multiplier(&self, step: usize) -> f64 {
        let warm = if self.warmup_steps == 0 {
            1.0
        } else {
            (step as f64 / self.warmup_steps as f64).min(1.0)
        };
        warm * self.resample_multiplier(step)
    }

    fn resample_multiplier(&self, step: usize) -> f64 {
        let Some(s) = self.last_resample else {
            return 1.0;
        };
        if step < s || step >= s + self.resample_warmup_steps {
            return 1.0;
        }
        let frac = (step - s) as f64 / self.resample_warmup_steps as f64;
        let low = self.resample_lr_factor;
        low + (1.0 - low) * (1.0 - (std::f64::consts::PI * frac).cos()) / 2.0
    }
}

pub fn lr_schedule(step: usize, schedule: &LrSchedule) -> f64 {
    schedule.multiplier(step)
}
