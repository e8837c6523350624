use super::TrainConfig;

/// Reduce-on-plateau schedule driven by validation loss.
///
/// A loss counts as an improvement when it beats the best so far by more
/// than `min_delta`. After `patience` consecutive non-improving epochs the
/// learning rate is multiplied by `factor` (floored at `min_lr`) and the
/// counter restarts.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateauScheduler {
    best: f64,
    wait: usize,
    patience: usize,
    factor: f64,
    min_lr: f64,
    min_delta: f64,
}

impl PlateauScheduler {
    pub fn new(patience: usize, factor: f64, min_lr: f64, min_delta: f64) -> Self {
        Self { best: f64::INFINITY, wait: 0, patience, factor, min_lr, min_delta }
    }

    pub fn from_config(config: &TrainConfig) -> Self {
        Self::new(
            config.plateau_patience,
            config.plateau_factor,
            config.min_learning_rate,
            config.plateau_min_delta,
        )
    }

    pub fn best(&self) -> f64 {
        self.best
    }

    pub fn wait(&self) -> usize {
        self.wait
    }

    /// Record an epoch's validation loss; returns the learning rate to use next.
    pub fn step(&mut self, validation_loss: f64, lr: f64) -> f64 {
        if validation_loss < self.best - self.min_delta {
            self.best = validation_loss;
            self.wait = 0;
            return lr;
        }
        self.wait += 1;
        if self.wait >= self.patience {
            self.wait = 0;
            return (lr * self.factor).max(self.min_lr);
        }
        lr
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_improvement_keeps_rate() {
        let mut s = PlateauScheduler::new(2, 0.5, 1e-5, 1e-6);
        let mut lr = 1e-3;
        for loss in [1.0, 0.9, 0.8] {
            lr = s.step(loss, lr);
        }
        assert_eq!(lr, 1e-3);
        assert_eq!(s.best(), 0.8);
    }

    #[test]
    fn reduces_after_patience_non_improving_epochs() {
        let mut s = PlateauScheduler::new(3, 0.5, 1e-5, 1e-6);
        let mut trace = Vec::new();
        let mut lr = 1e-3;
        for loss in [1.0, 1.1, 1.1, 1.1] {
            lr = s.step(loss, lr);
            trace.push(lr);
        }
        assert_eq!(trace, vec![1e-3, 1e-3, 1e-3, 5e-4]);
        assert_eq!(s.wait(), 0);
        assert_eq!(s.best(), 1.0);
    }

    #[test]
    fn floor_holds() {
        let mut s = PlateauScheduler::new(1, 0.5, 1e-5, 0.0);
        let mut lr = 1e-5;
        s.step(1.0, lr);
        lr = s.step(1.0, lr);
        assert_eq!(lr, 1e-5);
        lr = s.step(2.0, 1.5e-5);
        assert_eq!(lr, 1e-5);
    }

    #[test]
    fn min_delta_filters_tiny_gains() {
        let mut s = PlateauScheduler::new(5, 0.5, 1e-5, 1e-3);
        s.step(1.0, 1e-3);
        s.step(0.9995, 1e-3);
        assert_eq!(s.best(), 1.0);
        assert_eq!(s.wait(), 1);
    }
}
