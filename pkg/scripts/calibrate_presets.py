"""Regenerate the frozen separation scales shipped in taskgen.CALIBRATED_SCALES.

Bisects each (preset, target BER) pair to interval convergence under common
random numbers at a large Monte Carlo size, then cross-checks the result with
fresh seeds at the acceptance-test size. Paste the printed dict into
taskgen.py when geometry changes.
"""

from __future__ import annotations

from dataclasses import replace

from alsim import taskgen as tg

N_MC = 400_000
SEED = 20240
CHECK_SEEDS = (11, 12, 13)


def bisect_scale(spec: tg.TaskSpec, target: float) -> float:
    def ber_at(scale: float) -> float:
        task = tg.build_task(replace(spec, separation_scale=scale))
        return tg.estimate_bayes_error(task, N_MC, SEED).rate

    lo, hi = 0.0, 1.0
    while ber_at(hi) > target:
        hi *= 2.0
        if hi > 4096:
            raise RuntimeError(f"target {target} unreachable for {spec.task_id}")
    while hi - lo > 1e-4:
        mid = 0.5 * (lo + hi)
        if ber_at(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def main() -> None:
    scales: dict[tuple[str, float], float] = {}
    for task_id in tg.TASK_IDS:
        for target in tg.TARGET_BERS:
            spec = tg.make_spec(task_id, separation_scale=1.0)
            scale = bisect_scale(spec, target)
            scales[(task_id, target)] = scale
            task = tg.build_task(replace(spec, separation_scale=scale))
            checks = [tg.estimate_bayes_error(task, 100_000, s).rate for s in CHECK_SEEDS]
            worst = max(abs(c - target) for c in checks)
            print(
                f"{task_id:5s} target={target:.2f} scale={scale:.6f} "
                f"recheck_max_err={worst:.4f} {'OK' if worst <= 0.005 else 'DRIFT'}"
            )
    print("\nCALIBRATED_SCALES: dict[tuple[str, float], float] = {")
    for (task_id, target), scale in sorted(scales.items()):
        print(f'    ("{task_id}", {target}): {scale!r},')
    print("}")


if __name__ == "__main__":
    main()
