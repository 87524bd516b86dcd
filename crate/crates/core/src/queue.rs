use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// A bandit sample in flight.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackEvent<A> {
    pub origin: u64,
    pub arrival: u64,
    pub loss: f64,
    pub action: A,
}

impl<A> FeedbackEvent<A> {
    pub fn delay(&self) -> u64 {
        self.arrival - self.origin
    }
}

/// Holds samples until their arrival round. Within a round, events come out
/// in increasing order of origin.
#[derive(Debug, Clone)]
pub struct DeliveryQueue<A> {
    pending: BTreeMap<u64, Vec<FeedbackEvent<A>>>,
    last_drained: u64,
    len: usize,
}

impl<A> Default for DeliveryQueue<A> {
    fn default() -> Self {
        Self { pending: BTreeMap::new(), last_drained: 0, len: 0 }
    }
}

impl<A> DeliveryQueue<A> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn enqueue(&mut self, event: FeedbackEvent<A>) -> Result<()> {
        if event.arrival <= event.origin || event.arrival <= self.last_drained {
            return Err(Error::LateEnqueue {
                origin: event.origin,
                arrival: event.arrival,
                current: self.last_drained.max(event.origin),
            });
        }
        self.pending.entry(event.arrival).or_default().push(event);
        self.len += 1;
        Ok(())
    }

    /// Events arriving in `round`, oldest origin first.
    pub fn drain(&mut self, round: u64) -> Result<Vec<FeedbackEvent<A>>> {
        if round <= self.last_drained {
            return Err(Error::NonMonotoneDrain { round, last: self.last_drained });
        }
        if let Some((&first, _)) = self.pending.first_key_value() {
            if first < round {
                return Err(Error::SkippedDelivery { round, pending: first });
            }
        }
        self.last_drained = round;
        let mut batch = self.pending.remove(&round).unwrap_or_default();
        batch.sort_by_key(|e| e.origin);
        self.len -= batch.len();
        Ok(batch)
    }

    /// Number of samples still in flight.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}
