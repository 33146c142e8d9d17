//! Sliding-window rate limiter shared by HTTP backends.

use std::collections::VecDeque;
use std::sync::Mutex;
use std::time::{Duration, Instant};

const WINDOW: Duration = Duration::from_secs(60);

/// Caps dispatches so that over any 60-second window at most
/// `max_per_minute` requests go out. [`RateLimiter::acquire`] blocks the
/// calling worker until a slot is free.
#[derive(Debug)]
pub struct RateLimiter {
    max_per_minute: u32,
    dispatches: Mutex<VecDeque<Instant>>,
}

impl RateLimiter {
    pub fn new(max_per_minute: u32) -> Self {
        Self {
            max_per_minute: max_per_minute.max(1),
            dispatches: Mutex::new(VecDeque::new()),
        }
    }

    /// Block until a dispatch slot is available, then claim it.
    pub fn acquire(&self) {
        loop {
            match self.try_admit(Instant::now()) {
                None => return,
                Some(wait) => std::thread::sleep(wait),
            }
        }
    }

    /// Admit a dispatch at `now`, or report how long to wait.
    fn try_admit(&self, now: Instant) -> Option<Duration> {
        let mut dispatches = self.dispatches.lock().unwrap();
        while let Some(&oldest) = dispatches.front() {
            if now.duration_since(oldest) >= WINDOW {
                dispatches.pop_front();
            } else {
                break;
            }
        }
        if dispatches.len() < self.max_per_minute as usize {
            dispatches.push_back(now);
            return None;
        }
        let oldest = *dispatches.front().expect("queue is full, so non-empty");
        Some(WINDOW.saturating_sub(now.duration_since(oldest)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admits_up_to_capacity_then_defers() {
        let limiter = RateLimiter::new(3);
        let base = Instant::now();
        assert_eq!(limiter.try_admit(base), None);
        assert_eq!(limiter.try_admit(base + Duration::from_secs(1)), None);
        assert_eq!(limiter.try_admit(base + Duration::from_secs(2)), None);
        // Fourth dispatch inside the window must wait until the first expires.
        let wait = limiter
            .try_admit(base + Duration::from_secs(3))
            .expect("over capacity");
        assert_eq!(wait, Duration::from_secs(57));
    }

    #[test]
    fn window_expiry_frees_slots() {
        let limiter = RateLimiter::new(1);
        let base = Instant::now();
        assert_eq!(limiter.try_admit(base), None);
        assert!(limiter.try_admit(base + Duration::from_secs(59)).is_some());
        assert_eq!(limiter.try_admit(base + Duration::from_secs(60)), None);
    }

    #[test]
    fn never_exceeds_capacity_in_any_window() {
        let limiter = RateLimiter::new(5);
        let base = Instant::now();
        let mut admitted = Vec::new();
        // Try a burst of 40 dispatch attempts over 90 simulated seconds.
        for tick in 0..40u64 {
            let t = base + Duration::from_millis(tick * 2250);
            if limiter.try_admit(t).is_none() {
                admitted.push(t);
            }
        }
        for (i, &t) in admitted.iter().enumerate() {
            let in_window = admitted[i..]
                .iter()
                .take_while(|&&u| u.duration_since(t) < WINDOW)
                .count();
            assert!(in_window <= 5, "window starting at dispatch {i} holds {in_window}");
        }
    }
}
