//! Run metrics: message counters, round counts, and memory proxies.

/// Counters accumulated over a simulation run.
///
/// Memory consumption is proxied by `adjacency_entries_peak` (entries held in
/// edge-model caches) plus `payload_bytes_sent`; process peak RSS is reported
/// separately and only where the platform exposes it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metrics {
    /// One per broadcast, regardless of receiver count.
    pub messages_sent: u64,
    /// One per receiver that a message actually reached.
    pub messages_delivered: u64,
    /// One per receiver the transmission model decided to drop.
    pub messages_dropped: u64,
    pub rounds_executed: u64,
    pub wall_clock_ms: f64,
    /// Peak of the edge model's cached adjacency entry count.
    pub adjacency_entries_peak: u64,
    pub payload_bytes_sent: u64,
}

impl Metrics {
    pub fn record_adjacency_entries(&mut self, entries: u64) {
        if entries > self.adjacency_entries_peak {
            self.adjacency_entries_peak = entries;
        }
    }
}

/// Peak resident set size of this process in bytes, where the platform
/// exposes it (Linux VmHWM, falling back to current VmRSS on kernels that
/// hide the high-water mark). Advisory only; not part of the stable metrics.
pub fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let field = |name: &str| -> Option<u64> {
        for line in status.lines() {
            if let Some(rest) = line.strip_prefix(name) {
                let kb: u64 = rest.trim().trim_end_matches("kB").trim().parse().ok()?;
                return Some(kb * 1024);
            }
        }
        None
    };
    field("VmHWM:").or_else(|| field("VmRSS:"))
}
