//! Thread-parallel boundedness sweeps.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;

use zerostab_core::sim::{
    sweep_point, sweep_verdict, validate_sweep, InitPolicy, SweepPoint, SweepResult,
};
use zerostab_core::{GridFamily, MethodSpec, Result};

/// Same result as [`zerostab_core::sim::boundedness_sweep`], with the step
/// counts spread over up to `jobs` scoped threads. Points come back in the
/// order of `ns` regardless of scheduling.
pub fn sweep_parallel<F>(
    spec: &MethodSpec,
    family: &F,
    ns: &[usize],
    policy: &InitPolicy,
    jobs: usize,
) -> Result<SweepResult>
where
    F: GridFamily + Sync + ?Sized,
{
    validate_sweep(ns)?;
    let inits = policy.inits(spec.steps());
    let jobs = jobs.clamp(1, ns.len());
    // Largest N first: it dominates the runtime.
    let mut order: Vec<usize> = (0..ns.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(ns[i]));
    let next = AtomicUsize::new(0);
    let worker = || {
        let mut done = Vec::new();
        loop {
            let slot = next.fetch_add(1, Ordering::Relaxed);
            let Some(&i) = order.get(slot) else { break };
            let point = family
                .grid(ns[i])
                .and_then(|g| sweep_point(spec, &g, &inits));
            done.push((i, point));
        }
        done
    };
    let finished: Vec<(usize, Result<SweepPoint>)> = if jobs == 1 {
        worker()
    } else {
        thread::scope(|s| {
            let handles: Vec<_> = (0..jobs).map(|_| s.spawn(worker)).collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("sweep worker panicked"))
                .collect()
        })
    };
    let mut slots: Vec<Option<Result<SweepPoint>>> = (0..ns.len()).map(|_| None).collect();
    for (i, point) in finished {
        slots[i] = Some(point);
    }
    let points = slots
        .into_iter()
        .map(|p| p.expect("every step count is visited"))
        .collect::<Result<Vec<_>>>()?;
    let (verdict, max_ratio) = sweep_verdict(&points);
    Ok(SweepResult {
        points,
        verdict,
        max_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use zerostab_core::sim::boundedness_sweep;
    use zerostab_core::GridMap;

    #[test]
    fn matches_serial_sweep() {
        let spec = MethodSpec::bdf(3).unwrap();
        let map = GridMap::ExpRamp { c: 2.0 };
        let ns = [40, 80, 160, 320, 640];
        let policy = InitPolicy::default();
        let serial = boundedness_sweep(&spec, &map, &ns, &policy).unwrap();
        for jobs in [1, 2, 3, 8] {
            assert_eq!(
                sweep_parallel(&spec, &map, &ns, &policy, jobs).unwrap(),
                serial
            );
        }
    }

    #[test]
    fn errors_propagate() {
        let spec = MethodSpec::bdf(2).unwrap();
        let map = GridMap::Identity;
        assert!(sweep_parallel(&spec, &map, &[10, 20], &InitPolicy::default(), 2).is_err());
        assert!(sweep_parallel(&spec, &map, &[1, 2, 4, 8], &InitPolicy::default(), 2).is_err());
    }
}
