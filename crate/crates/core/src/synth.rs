//! Synthetic firewall sessions for examples and tests.
//!
//! The generator mimics the broad shape of a perimeter firewall export:
//! allowed sessions are NAT-translated and exchange traffic in both
//! directions, denied and dropped sessions are short one-sided attempts, and
//! reset-both is a tiny class that looks like a truncated allowed session.
//! A small fraction of deny and drop rows share the same traffic profile, so
//! the problem is not perfectly separable. This is not the public dataset.

use rand::Rng as _;

use crate::dataset::{ActionLabel, Dataset, LogRecord};
use crate::rng;

/// Approximate class shares (allow, deny, drop, reset-both).
pub const CLASS_SHARES: [f64; 4] = [0.574, 0.229, 0.196, 0.001];

const SERVICE_PORTS: [u32; 8] = [53, 443, 80, 25, 123, 993, 8080, 3389];
const PROBED_PORTS: [u32; 8] = [445, 23, 22, 3389, 1433, 139, 5900, 8291];

/// `n` synthetic rows drawn from `seed`.
pub fn firewall_log(n: usize, seed: u64) -> Dataset {
    let mut r = rng::seeded(seed);
    let records: Vec<LogRecord> = (0..n).map(|_| record(&mut r)).collect();
    Dataset::from_records(&records)
}

fn pick_class(r: &mut rng::Rng) -> ActionLabel {
    let u: f64 = r.random();
    let mut acc = 0.0;
    for (label, share) in ActionLabel::ALL.into_iter().zip(CLASS_SHARES) {
        acc += share;
        if u < acc {
            return label;
        }
    }
    ActionLabel::ResetBoth
}

fn ephemeral(r: &mut rng::Rng) -> f64 {
    r.random_range(1024..=65535u32) as f64
}

fn one_of(r: &mut rng::Rng, ports: &[u32]) -> f64 {
    ports[r.random_range(0..ports.len())] as f64
}

fn record(r: &mut rng::Rng) -> LogRecord {
    let action = pick_class(r);
    let f = match action {
        ActionLabel::Allow => {
            let dst = if r.random_bool(0.8) { one_of(r, &SERVICE_PORTS) } else { ephemeral(r) };
            let sent = r.random_range(1..=40u32) as f64;
            let recv = if r.random_bool(0.9) { r.random_range(1..=60u32) as f64 } else { 0.0 };
            let bs = sent * r.random_range(60..=700u32) as f64;
            let br = recv * r.random_range(60..=1400u32) as f64;
            let elapsed = r.random_range(0..=600u32) as f64;
            [ephemeral(r), dst, ephemeral(r), dst, bs + br, bs, br, sent + recv, elapsed, sent, recv]
        }
        ActionLabel::Deny | ActionLabel::Drop => {
            // Shared "probe" profile for a few rows of either class.
            let ambiguous = r.random_bool(0.01);
            let deny_like = action == ActionLabel::Deny && !ambiguous;
            let dst = if deny_like {
                if r.random_bool(0.7) { one_of(r, &PROBED_PORTS) } else { ephemeral(r) }
            } else if r.random_bool(0.6) {
                one_of(r, &PROBED_PORTS[..4])
            } else {
                ephemeral(r)
            };
            let (sent, bytes, elapsed) = if deny_like {
                let s = r.random_range(1..=3u32) as f64;
                (s, s * r.random_range(70..=190u32) as f64, r.random_range(0..=30u32) as f64)
            } else {
                (1.0, r.random_range(54..=74u32) as f64, 0.0)
            };
            let src = if r.random_bool(0.2) { one_of(r, &[53, 123, 137]) } else { ephemeral(r) };
            [src, dst, 0.0, 0.0, bytes, bytes, 0.0, sent, elapsed, sent, 0.0]
        }
        ActionLabel::ResetBoth => {
            let dst = one_of(r, &SERVICE_PORTS[..3]);
            let sent = r.random_range(1..=3u32) as f64;
            let recv = r.random_range(0..=2u32) as f64;
            let bs = sent * r.random_range(60..=200u32) as f64;
            let br = recv * 60.0;
            let nat = if r.random_bool(0.5) { ephemeral(r) } else { 0.0 };
            let nat_dst = if nat > 0.0 { dst } else { 0.0 };
            [ephemeral(r), dst, nat, nat_dst, bs + br, bs, br, sent + recv, 0.0, sent, recv]
        }
    };
    LogRecord { features: f, action }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valid_and_deterministic() {
        let a = firewall_log(2000, 5);
        assert!(a.validate().is_empty());
        assert_eq!(a, firewall_log(2000, 5));
        let d = a.class_distribution();
        assert!(d.counts[0] > d.counts[1] && d.counts[1] > 0 && d.counts[2] > 0);
    }
}
