/// Proportional and integral gains of a second-order tracking loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopGains {
    pub alpha: f64,
    pub beta: f64,
}

impl LoopGains {
    /// Maps a normalized loop bandwidth (radians per update) and damping
    /// factor onto proportional/integral gains.
    pub fn from_bandwidth(bandwidth: f64, damping: f64) -> Self {
        let denom = 1.0 + 2.0 * damping * bandwidth + bandwidth * bandwidth;
        Self {
            alpha: 4.0 * damping * bandwidth / denom,
            beta: 4.0 * bandwidth * bandwidth / denom,
        }
    }

    pub fn scaled(self, gain: f64) -> Self {
        Self {
            alpha: self.alpha * gain,
            beta: self.beta * gain,
        }
    }
}
