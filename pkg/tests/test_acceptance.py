"""Acceptance gate: every shipping criterion, one printed verdict line each.

Run with ``pytest -s tests/test_acceptance.py`` to see the verdict lines
as the suite executes; without ``-s`` they show up in the captured output
of any failing test.
"""

import time

import numpy as np

from spdcmux import (
    BoundaryMode,
    ChainSpec,
    EmissionBatch,
    ParameterError,
    RegisterTopology,
    SimConfig,
    StorageState,
    accessible_delays,
    herald,
    plan_cycle,
    run_cycle,
    run_simulation,
    stationary_rates,
    storage_capacity,
    verify_monotone_assignment,
)
from spdcmux.cli import run_command

FULL_DELAY_SET = frozenset(range(8))
EXPECTED_ROWS_11X3 = {
    1: frozenset({0}),
    2: frozenset({0, 1, 2, 4}),
    3: frozenset({0, 1, 2, 3, 4, 5, 6}),
    4: FULL_DELAY_SET,
    5: FULL_DELAY_SET,
    6: FULL_DELAY_SET,
    7: FULL_DELAY_SET,
    8: FULL_DELAY_SET,
    9: frozenset({1, 2, 3, 4, 5, 6, 7}),
    10: frozenset({3, 5, 6, 7}),
    11: frozenset({7}),
}


def _verdict(label: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")


def test_a1_balanced_error_band() -> None:
    # reference operating point: 100 sources, 3 steps, 4-photon train,
    # mean 0.049 pairs, no feedback, boundary limits on, 100k cycles
    config = SimConfig(
        source_count=100, multiple=4, mean_pairs=0.049, cycles=100_000, seed=42
    )
    start = time.perf_counter()
    metrics = run_simulation(config)
    runtime = time.perf_counter() - start
    lack = metrics.lack_rate
    multi = metrics.multi_rate
    ok = 0.019 <= lack <= 0.029 and 0.019 <= multi <= 0.029 and runtime < 60.0
    detail = f"lack={lack:.5f} multi={multi:.5f} runtime={runtime:.1f}s (seed 42)"
    _verdict("A1 balanced error band", ok, detail)
    assert ok, detail


def test_a2_optimized_pump_in_band(tmp_path) -> None:
    out = tmp_path / "optimum.csv"
    code = run_command(
        ["optimize", "--sources", "100", "--multiple", "4", "--steps", "3",
         "--out", str(out)]
    )
    mean = float(out.read_text().strip().split("\n")[1].split(",")[0])
    ok = code == 0 and 0.044 <= mean <= 0.056
    detail = f"exit={code} optimized mean={mean:.6f}"
    _verdict("A2 optimized pump in band", ok, detail)
    assert ok, detail


def test_a3_reachability_table(tmp_path) -> None:
    topology = RegisterTopology(source_count=11, step_count=3)
    mismatches = [
        source
        for source, expected in EXPECTED_ROWS_11X3.items()
        if accessible_delays(topology, source).delays != expected
    ]
    out = tmp_path / "topology.csv"
    code = run_command(["verify-topology", "--sources", "11", "--steps", "3",
                        "--out", str(out)])
    for line in out.read_text().strip().split("\n")[1:]:
        cells = line.split(",")
        source = int(cells[0])
        dumped = frozenset(d for d, cell in enumerate(cells[1:]) if cell == "1")
        if dumped != EXPECTED_ROWS_11X3[source]:
            mismatches.append(source)
    ok = code == 0 and not mismatches
    detail = f"exit={code} mismatched rows={sorted(set(mismatches)) or 'none'}"
    _verdict("A3 reachability table", ok, detail)
    assert ok, detail


def _random_chain_configs(count: int) -> list[SimConfig]:
    """Deterministic spread of small banks whose exact rates are testable."""
    rng = np.random.default_rng(20240823)
    configs: list[SimConfig] = []
    while len(configs) < count:
        step_count = int(rng.integers(1, 4))
        span = 2**step_count
        multiple = int(rng.integers(max(1, span - 4), span + 1))
        source_count = int(rng.integers(2, 21))
        mean = float(rng.uniform(0.02, 0.3))
        spec = ChainSpec.from_mean_pairs(source_count, multiple, step_count, mean)
        lack = stationary_rates(spec).lack_rate
        if not 5e-4 <= lack <= 0.9:
            continue  # keep both error rates resolvable at 100k cycles
        configs.append(
            SimConfig(
                source_count=source_count,
                multiple=multiple,
                mean_pairs=mean,
                step_count=step_count,
                cycles=100_000,
                seed=int(rng.integers(0, 2**31)),
                boundary=BoundaryMode.UNCONSTRAINED,
            )
        )
    return configs


def _batched_rates(
    config: SimConfig, batch_count: int, batch_cycles: int
) -> tuple[np.ndarray, np.ndarray]:
    """Per-batch lack and multi rates from one continuous run."""
    rng = np.random.default_rng(config.seed)
    storage = StorageState.empty(config.capacity)
    lack_batches = np.zeros(batch_count)
    multi_batches = np.zeros(batch_count)
    slots = batch_cycles * config.multiple
    cycle = 0
    for batch in range(batch_count):
        lacks = multis = 0
        for _ in range(batch_cycles):
            plan = run_cycle(config, storage, rng, cycle_index=cycle)
            cycle += 1
            lacks += plan.lack_count
            multis += plan.multi_count
            storage = plan.storage_out
        lack_batches[batch] = lacks / slots
        multi_batches[batch] = multis / slots
    return lack_batches, multi_batches


def test_a4_monte_carlo_agrees_with_chain() -> None:
    # 20 randomized small unconstrained banks, 100k cycles each, measured
    # rates within 4 standard errors of the exact chain solution
    configs = _random_chain_configs(20)
    failures = []
    for config in configs:
        spec = ChainSpec.from_mean_pairs(
            config.source_count, config.multiple, config.step_count, config.mean_pairs
        )
        exact = stationary_rates(spec)
        lack_b, multi_b = _batched_rates(config, batch_count=100, batch_cycles=1_000)
        total_slots = 100_000 * config.multiple
        floor = 2.0 / total_slots
        for name, batches, target in (
            ("lack", lack_b, exact.lack_rate),
            ("multi", multi_b, exact.multi_rate),
        ):
            observed = batches.mean()
            se = batches.std(ddof=1) / np.sqrt(len(batches))
            tolerance = max(4.0 * se, floor)
            if abs(observed - target) > tolerance:
                failures.append(
                    f"S={config.source_count} m={config.multiple} "
                    f"K={config.step_count} mean={config.mean_pairs:.4f} {name}: "
                    f"|{observed:.6f}-{target:.6f}|>{tolerance:.2e}"
                )
    ok = not failures
    detail = f"20 configs, 40 rate comparisons, deviations={failures or 'none'}"
    _verdict("A4 chain agreement", ok, detail)
    assert ok, detail


def test_a5_storage_capacity_rule() -> None:
    expected = {m: 8 - m for m in range(1, 9)}
    actual = {m: storage_capacity(3, m) for m in range(1, 9)}
    overflow_rejected = False
    try:
        storage_capacity(3, 9)
    except ParameterError:
        overflow_rejected = True
    ok = actual == expected and actual[6] == 2 and overflow_rejected
    detail = f"capacities={actual} train longer than 8 rejected={overflow_rejected}"
    _verdict("A5 storage capacity rule", ok, detail)
    assert ok, detail


def test_a6_per_cycle_conservation() -> None:
    config = SimConfig(
        source_count=100, multiple=4, mean_pairs=0.1, cycles=100_000, seed=7
    )
    rng = np.random.default_rng(config.seed)
    storage = StorageState.empty(config.capacity)
    violations = 0
    for cycle in range(config.cycles):
        plan = run_cycle(config, storage, rng, cycle_index=cycle)
        inflow = plan.herald_count + storage.level
        outflow = plan.filled_count + plan.storage_out.level + plan.discarded
        if inflow != outflow:
            violations += 1
        storage = plan.storage_out
    ok = violations == 0
    detail = f"{config.cycles} cycles checked, violations={violations}"
    _verdict("A6 photon conservation", ok, detail)
    assert ok, detail


def test_a7_scaling_trends() -> None:
    def lack_at(source_count: int, mean: float) -> float:
        return run_simulation(
            SimConfig(
                source_count=source_count,
                multiple=4,
                mean_pairs=mean,
                cycles=100_000,
                seed=99,
            )
        ).lack_rate

    def multi_at(mean: float) -> float:
        return run_simulation(
            SimConfig(
                source_count=100, multiple=4, mean_pairs=mean, cycles=100_000, seed=99
            )
        ).multi_rate

    lacks = [lack_at(s, 0.05) for s in (25, 50, 100, 200)]
    decreasing = all(a > b for a, b in zip(lacks, lacks[1:]))
    ratio = multi_at(0.10) / multi_at(0.05)
    ratio_ok = 1.8 <= ratio <= 2.2
    ok = decreasing and ratio_ok
    detail = (
        f"lack over sizes (25,50,100,200)={[f'{v:.4f}' for v in lacks]} "
        f"multi ratio 0.10/0.05={ratio:.3f}"
    )
    _verdict("A7 scaling trends", ok, detail)
    assert ok, detail


def test_a8_monotone_routing() -> None:
    # 10k random cycles per train length: random storage levels and herald
    # patterns (fire probability 0.3), both boundary settings
    rng = np.random.default_rng(11)
    topology = RegisterTopology(source_count=11, step_count=3)
    checked = 0
    failures = 0
    for multiple in (4, 6, 8):
        capacity = storage_capacity(3, multiple)
        for _ in range(10_000):
            level = int(rng.integers(0, capacity + 1))
            state = StorageState(stored=(1,) * level, capacity=capacity)
            fired = rng.random(11) < 0.3
            counts = np.where(fired, rng.integers(1, 4, 11), 0).astype(np.int64)
            report = herald(EmissionBatch(pair_counts=counts, mean_pairs=0.3))
            for limits in (True, False):
                plan = plan_cycle(topology, report, state, multiple, boundary_limits=limits)
                checked += 1
                if not verify_monotone_assignment(plan.new_assignments):
                    failures += 1
    ok = failures == 0
    detail = f"{checked} plans checked, non-monotone={failures}"
    _verdict("A8 monotone routing", ok, detail)
    assert ok, detail


def test_a9_deterministic_output(tmp_path) -> None:
    argv = [
        "simulate",
        "--sources", "100",
        "--multiple", "4",
        "--mean-pairs", "0.049",
        "--cycles", "20000",
        "--seed", "42",
    ]
    out_a = tmp_path / "first.csv"
    out_b = tmp_path / "second.csv"
    code_a = run_command(argv + ["--out", str(out_a)])
    code_b = run_command(argv + ["--out", str(out_b)])
    identical = out_a.read_bytes() == out_b.read_bytes()
    ok = code_a == 0 and code_b == 0 and identical
    detail = f"exits=({code_a},{code_b}) byte-identical={identical}"
    _verdict("A9 deterministic output", ok, detail)
    assert ok, detail
