use std::fmt::Write;

/// Metrics for one link run, serialized as flat `key=value` lines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinkReport {
    pub scenario: String,
    pub seed: u64,
    pub symbols: usize,
    pub sync_index: Option<usize>,
    pub sync_rotation: Option<usize>,
    pub post_sync_dibits: usize,
    pub ser_post_sync: Option<f64>,
    pub ber_post_sync: Option<f64>,
    pub evm_rms: Option<f64>,
    pub clock_locked: bool,
    pub clock_first_lock: Option<usize>,
    pub costas_locked: bool,
    pub costas_first_lock: Option<usize>,
    pub cma_enabled: bool,
    pub cma_resets: usize,
    pub rate_estimate: f64,
    pub freq_estimate: f64,
    pub frames_found: usize,
    pub payload_text: Option<String>,
    pub byte_alignment: Option<usize>,
    /// Extra scenario-specific rows, kept in insertion order.
    pub extra: Vec<(String, String)>,
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    match v {
        Some(v) => v.to_string(),
        None => "none".to_owned(),
    }
}

fn opt_f(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_owned(), |v| format!("{v:.9e}"))
}

impl LinkReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k}={v}");
        };
        kv("scenario", self.scenario.clone());
        kv("seed", self.seed.to_string());
        kv("symbols", self.symbols.to_string());
        kv("sync_index", opt(&self.sync_index));
        kv("sync_rotation", opt(&self.sync_rotation));
        kv("post_sync_dibits", self.post_sync_dibits.to_string());
        kv("ser_post_sync", opt_f(self.ser_post_sync));
        kv("ber_post_sync", opt_f(self.ber_post_sync));
        kv("evm_rms_percent", opt_f(self.evm_rms));
        kv("clock_locked", self.clock_locked.to_string());
        kv("clock_first_lock", opt(&self.clock_first_lock));
        kv("costas_locked", self.costas_locked.to_string());
        kv("costas_first_lock", opt(&self.costas_first_lock));
        kv("cma_enabled", self.cma_enabled.to_string());
        kv("cma_resets", self.cma_resets.to_string());
        kv("rate_estimate", format!("{:.9e}", self.rate_estimate));
        kv("freq_estimate", format!("{:.9e}", self.freq_estimate));
        kv("frames_found", self.frames_found.to_string());
        kv(
            "payload_text",
            self.payload_text
                .as_deref()
                .map_or_else(|| "none".to_owned(), |t| t.escape_default().to_string()),
        );
        kv("byte_alignment", opt(&self.byte_alignment));
        for (k, v) in &self.extra {
            kv(k, v.clone());
        }
        s
    }

    /// Parses `key=value` lines back into pairs.
    pub fn parse_pairs(text: &str) -> Vec<(String, String)> {
        text.lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.to_owned(), v.to_owned()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_key_values() {
        let r = LinkReport {
            scenario: "sequence2".into(),
            sync_index: Some(17),
            payload_text: Some("HelloWorld".into()),
            frames_found: 3,
            ..LinkReport::default()
        };
        let pairs = LinkReport::parse_pairs(&r.to_text());
        let get = |k: &str| pairs.iter().find(|(a, _)| a == k).map(|(_, v)| v.as_str());
        assert_eq!(get("sync_index"), Some("17"));
        assert_eq!(get("payload_text"), Some("HelloWorld"));
        assert_eq!(get("ser_post_sync"), Some("none"));
        assert_eq!(get("frames_found"), Some("3"));
    }
}
