use serde::Serialize;

/// Windowed lock detector.
///
/// Every `window` updates it compares the normalized RMS of the loop's
/// error signal against a threshold. The loop counts as locked while the
/// most recent full window is below the threshold.
#[derive(Debug, Clone)]
pub struct LockDetector {
    window: usize,
    threshold: f64,
    n: usize,
    sum: f64,
    sum_sq: f64,
    scale: f64,
    updates: usize,
    state: LockStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct LockStatus {
    /// Whether the last complete window was below the threshold.
    pub locked: bool,
    /// Update index at the end of the first window that was below the
    /// threshold.
    pub first_lock: Option<usize>,
    /// Normalized error RMS of the last complete window.
    pub metric: Option<f64>,
}

impl LockStatus {
    /// True unless the loop locked at some point and is still locked.
    pub fn lost(&self) -> bool {
        !self.locked || self.first_lock.is_none()
    }
}

impl LockDetector {
    pub fn new(window: usize, threshold: f64) -> Self {
        Self {
            window: window.max(1),
            threshold,
            n: 0,
            sum: 0.0,
            sum_sq: 0.0,
            scale: 0.0,
            updates: 0,
            state: LockStatus::default(),
        }
    }

    /// Feeds one error sample. `scale` is the signal level the error is
    /// normalized by (averaged over the window).
    pub fn update(&mut self, error: f64, scale: f64) {
        self.n += 1;
        self.updates += 1;
        self.sum += error;
        self.sum_sq += error * error;
        self.scale += scale;
        if self.n == self.window {
            let n = self.n as f64;
            let mean = self.sum / n;
            let var = (self.sum_sq / n - mean * mean).max(0.0);
            let level = self.scale / n;
            let metric = if level > 0.0 { var.sqrt() / level } else { f64::INFINITY };
            self.state.metric = Some(metric);
            self.state.locked = metric < self.threshold;
            if self.state.locked && self.state.first_lock.is_none() {
                self.state.first_lock = Some(self.updates);
            }
            self.n = 0;
            self.sum = 0.0;
            self.sum_sq = 0.0;
            self.scale = 0.0;
        }
    }

    pub fn status(&self) -> LockStatus {
        self.state
    }
}

/// Windowed eye-opening lock detector for the symbol clock.
///
/// Each update supplies the matched-filter power at the chosen sampling
/// instant and half a symbol away from it. Every `window` updates the ratio
/// of their sums is compared against a threshold. Noise alone gives a ratio
/// near 1 at any input level; a stream sampled at its symbol instants gives
/// the raised-cosine mid-point energy, about 0.83 at rolloff 0.35.
#[derive(Debug, Clone)]
pub struct EyeDetector {
    window: usize,
    threshold: f64,
    n: usize,
    on: f64,
    mid: f64,
    updates: usize,
    state: LockStatus,
}

impl EyeDetector {
    pub fn new(window: usize, threshold: f64) -> Self {
        Self {
            window: window.max(1),
            threshold,
            n: 0,
            on: 0.0,
            mid: 0.0,
            updates: 0,
            state: LockStatus::default(),
        }
    }

    pub fn update(&mut self, on_power: f64, mid_power: f64) {
        self.n += 1;
        self.updates += 1;
        self.on += on_power;
        self.mid += mid_power;
        if self.n == self.window {
            let metric = if self.on > 0.0 { self.mid / self.on } else { f64::INFINITY };
            self.state.metric = Some(metric);
            self.state.locked = metric < self.threshold;
            if self.state.locked && self.state.first_lock.is_none() {
                self.state.first_lock = Some(self.updates);
            }
            self.n = 0;
            self.on = 0.0;
            self.mid = 0.0;
        }
    }

    pub fn status(&self) -> LockStatus {
        self.state
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn locks_on_quiet_error() {
        let mut d = LockDetector::new(10, 0.1);
        for i in 0..10 {
            d.update(if i % 2 == 0 { 1.0 } else { -1.0 }, 1.0);
        }
        assert!(!d.status().locked);
        for _ in 0..10 {
            d.update(0.01, 1.0);
        }
        let s = d.status();
        assert!(s.locked && !s.lost());
        assert_eq!(s.first_lock, Some(20));
    }

    #[test]
    fn eye_ratio_decides_lock() {
        let mut d = EyeDetector::new(4, 0.9);
        for _ in 0..4 {
            d.update(1.0, 1.0);
        }
        assert!(!d.status().locked);
        assert_eq!(d.status().metric, Some(1.0));
        for _ in 0..4 {
            d.update(1.0, 0.8);
        }
        assert!(d.status().locked);
        assert_eq!(d.status().first_lock, Some(8));
        let mut silent = EyeDetector::new(2, 0.9);
        silent.update(0.0, 0.0);
        silent.update(0.0, 0.0);
        assert!(!silent.status().locked);
    }
}
