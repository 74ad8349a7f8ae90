use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Anything carrying an integer step index.
pub trait Stamped {
    fn step(&self) -> u64;
}

/// Fixed-capacity FIFO holding at most `capacity` items in increasing step order.
#[derive(Clone, Debug)]
pub struct RingBuffer<T> {
    capacity: usize,
    slots: VecDeque<T>,
}

impl<T: Stamped> RingBuffer<T> {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("ring buffer capacity must be positive".into()));
        }
        Ok(Self {
            capacity,
            slots: VecDeque::with_capacity(capacity),
        })
    }

    /// Appends `item`, returning the evicted oldest item when the buffer was full.
    pub fn push(&mut self, item: T) -> Result<Option<T>> {
        if let Some(newest) = self.slots.back() {
            if item.step() <= newest.step() {
                return Err(Error::Stale {
                    newest: newest.step(),
                    got: item.step(),
                });
            }
        }
        let evicted = if self.slots.len() == self.capacity {
            self.slots.pop_front()
        } else {
            None
        };
        self.slots.push_back(item);
        Ok(evicted)
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.slots.len() == self.capacity
    }

    pub fn newest(&self) -> Option<&T> {
        self.slots.back()
    }

    pub fn oldest(&self) -> Option<&T> {
        self.slots.front()
    }

    /// Oldest to newest.
    pub fn iter(&self) -> impl ExactSizeIterator<Item = &T> + DoubleEndedIterator {
        self.slots.iter()
    }

    pub fn get(&self, i: usize) -> Option<&T> {
        self.slots.get(i)
    }

    pub fn clear(&mut self) {
        self.slots.clear();
    }
}
