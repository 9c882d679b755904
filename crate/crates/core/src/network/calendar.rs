use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reservation {
    pub message: usize,
    pub start: f64,
    pub finish: f64,
}

impl Reservation {
    fn overlaps(&self, start: f64, finish: f64) -> bool {
        // half-open intervals; empty intervals never overlap
        start < finish && self.start < self.finish && start < self.finish && self.start < finish
    }
}

/// Exclusive per-link reservations, kept sorted by start time.
#[derive(Clone, Debug, Default)]
pub struct LinkCalendar {
    links: Vec<Vec<Reservation>>,
    avail: Vec<f64>,
}

impl LinkCalendar {
    pub fn new(link_count: usize) -> Self {
        LinkCalendar {
            links: vec![Vec::new(); link_count],
            avail: vec![0.0; link_count],
        }
    }

    /// Time at which the link becomes free: the latest reservation finish.
    pub fn avail(&self, link: usize) -> f64 {
        self.avail[link]
    }

    pub fn reservations(&self, link: usize) -> &[Reservation] {
        &self.links[link]
    }

    /// Records `[start, finish)` for `message` on `link`. Zero-length
    /// reservations are accepted and never conflict.
    pub fn reserve(&mut self, link: usize, message: usize, start: f64, finish: f64) -> Result<()> {
        if finish
            .partial_cmp(&start)
            .is_none_or(|o| o == Ordering::Less)
        {
            return Err(Error::Parameter(format!(
                "reservation finish {finish} precedes start {start}"
            )));
        }
        let list = &mut self.links[link];
        let pos = list.partition_point(|r| r.start <= start);
        let clash = pos
            .checked_sub(1)
            .map(|i| list[i].overlaps(start, finish))
            .unwrap_or(false)
            || list[pos..]
                .iter()
                .take_while(|r| r.start < finish)
                .any(|r| r.overlaps(start, finish));
        if clash {
            return Err(Error::Contention {
                link: link.to_string(),
                start,
                finish,
            });
        }
        list.insert(
            pos,
            Reservation {
                message,
                start,
                finish,
            },
        );
        self.avail[link] = self.avail[link].max(finish);
        Ok(())
    }
}
