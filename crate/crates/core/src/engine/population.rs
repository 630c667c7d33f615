use serde::{Deserialize, Serialize};

use crate::genome::CircuitGenome;

/// Steady-state population ordered by fitness, lowest loss first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Population {
    capacity: usize,
    members: Vec<CircuitGenome>,
    best_ever: Option<CircuitGenome>,
    inserted_count: usize,
    /// Results rejected for not beating the worst member.
    discarded_count: usize,
    failed_count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Insertion {
    Inserted {
        new_best: bool,
    },
    Replaced {
        evicted: u64,
        new_best: bool,
    },
    Rejected,
    /// Missing or non-finite fitness.
    Failed,
}

impl Insertion {
    pub fn entered(self) -> bool {
        matches!(
            self,
            Insertion::Inserted { .. } | Insertion::Replaced { .. }
        )
    }

    pub fn new_best(self) -> bool {
        matches!(
            self,
            Insertion::Inserted { new_best: true } | Insertion::Replaced { new_best: true, .. }
        )
    }
}

fn loss(g: &CircuitGenome) -> f64 {
    g.fitness().expect("members carry a fitness")
}

impl Population {
    pub fn new(capacity: usize) -> Self {
        Population {
            capacity,
            members: Vec::with_capacity(capacity),
            best_ever: None,
            inserted_count: 0,
            discarded_count: 0,
            failed_count: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.members.len() >= self.capacity
    }

    pub fn members(&self) -> &[CircuitGenome] {
        &self.members
    }

    pub fn best_ever(&self) -> Option<&CircuitGenome> {
        self.best_ever.as_ref()
    }

    pub fn inserted_count(&self) -> usize {
        self.inserted_count
    }

    pub fn discarded_count(&self) -> usize {
        self.discarded_count
    }

    pub fn failed_count(&self) -> usize {
        self.failed_count
    }

    /// Counts a result that never produced a genome.
    pub fn record_failure(&mut self) {
        self.failed_count += 1;
    }

    /// Inserts below capacity; at capacity replaces the worst member only on
    /// strict improvement. Ties keep arrival order.
    pub fn try_insert(&mut self, genome: CircuitGenome) -> Insertion {
        let f = match genome.fitness() {
            Some(f) if f.is_finite() => f,
            _ => {
                self.failed_count += 1;
                return Insertion::Failed;
            }
        };
        let evicted = if self.is_full() {
            match self.members.last() {
                Some(worst) if f < loss(worst) => self.members.pop().map(|g| g.genome_id()),
                _ => {
                    self.discarded_count += 1;
                    return Insertion::Rejected;
                }
            }
        } else {
            None
        };
        let new_best = self.best_ever.as_ref().is_none_or(|b| f < loss(b));
        if new_best {
            self.best_ever = Some(genome.clone());
        }
        let at = self.members.partition_point(|m| loss(m) <= f);
        self.members.insert(at, genome);
        self.inserted_count += 1;
        match evicted {
            Some(evicted) => Insertion::Replaced { evicted, new_best },
            None => Insertion::Inserted { new_best },
        }
    }

    /// Checks size, ordering and the best-ever snapshot.
    pub fn audit(&self) -> Result<(), String> {
        if self.members.len() > self.capacity {
            return Err(format!(
                "{} members exceed capacity {}",
                self.members.len(),
                self.capacity
            ));
        }
        for w in self.members.windows(2) {
            if loss(&w[0]) > loss(&w[1]) {
                return Err(format!(
                    "genome {} ({}) sorted before genome {} ({})",
                    w[0].genome_id(),
                    loss(&w[0]),
                    w[1].genome_id(),
                    loss(&w[1])
                ));
            }
        }
        match (&self.best_ever, self.members.first()) {
            (Some(b), Some(m)) if loss(m) < loss(b) => {
                Err("best_ever is worse than a member".into())
            }
            (None, Some(_)) => Err("members without best_ever".into()),
            _ => Ok(()),
        }
    }
}
