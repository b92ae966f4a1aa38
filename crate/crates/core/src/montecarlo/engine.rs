use rayon::prelude::*;

/// Replications per unit of parallel work. Batches are the determinism
/// boundary: accumulators fold within a batch in replication order and
/// across batches in batch order, so worker count never changes results.
pub(crate) const BATCH_SIZE: u64 = 4096;

/// Fold `total` replications into one accumulator.
///
/// `step` must derive all randomness from the replication index it is
/// given; the engine guarantees only the grouping of indices into batches
/// and the fixed merge order.
pub(crate) fn fold_replications<A, I, S>(
    total: u64,
    workers: Option<usize>,
    init: I,
    step: S,
    merge: impl Fn(&mut A, A),
) -> A
where
    A: Send,
    I: Fn() -> A + Send + Sync,
    S: Fn(&mut A, u64) + Send + Sync,
{
    let batches = total.div_ceil(BATCH_SIZE);
    let run_batch = |b: u64| {
        let mut acc = init();
        let lo = b * BATCH_SIZE;
        let hi = (lo + BATCH_SIZE).min(total);
        for r in lo..hi {
            step(&mut acc, r);
        }
        acc
    };
    let per_batch: Vec<A> = match workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .expect("worker pool");
            pool.install(|| (0..batches).into_par_iter().map(run_batch).collect())
        }
        None => (0..batches).into_par_iter().map(run_batch).collect(),
    };
    let mut iter = per_batch.into_iter();
    let mut out = iter.next().unwrap_or_else(&init);
    for acc in iter {
        merge(&mut out, acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::estimate::MeanAcc;
    use crate::montecarlo::RngPlan;
    use rand::Rng;

    fn run(workers: Option<usize>, total: u64) -> (f64, f64) {
        let plan = RngPlan::new(42);
        let acc = fold_replications(
            total,
            workers,
            MeanAcc::new,
            |acc, r| {
                let mut rng = plan.replication_rng(r);
                acc.push(rng.random::<f64>());
            },
            |a, b| a.merge(&b),
        );
        let est = acc.estimate(total);
        (est.mean, est.se)
    }

    #[test]
    fn worker_count_does_not_change_bits() {
        // More replications than one batch so the merge path is exercised.
        let single = run(Some(1), 3 * BATCH_SIZE + 17);
        let multi = run(Some(4), 3 * BATCH_SIZE + 17);
        assert_eq!(single.0.to_bits(), multi.0.to_bits());
        assert_eq!(single.1.to_bits(), multi.1.to_bits());
    }

    #[test]
    fn uniform_mean_is_recovered() {
        let (mean, se) = run(None, 20_000);
        assert!((mean - 0.5).abs() < 5.0 * se, "mean {mean} se {se}");
        approx::assert_abs_diff_eq!(se, (1.0 / 12.0f64 / 20_000.0).sqrt(), epsilon = 1e-4);
    }
}
