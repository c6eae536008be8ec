"""Which delays each source row can reach through the delay register.

An 11-row bank with a 3-step register is small enough to print in full.
Interior rows can route to any of the 8 delay values; rows near the top
and bottom lose options because the crossing geometry caps how many
stages they can take (top) or forces stages on them (bottom).
"""

from spdcmux import (
    RegisterTopology,
    accessible_delays,
    enumerate_delay_paths,
    step_count_bounds,
)

topology = RegisterTopology(source_count=11, step_count=3)

print(f"bank: {topology.source_count} rows, stages {topology.step_delays}")
print(f"delay range: 0 .. {topology.max_delay} cycles")
print()

header = "row   window   " + " ".join(f"d{d}" for d in range(topology.delay_count))
print(header)
for source in range(1, topology.source_count + 1):
    low, high = step_count_bounds(topology, source)
    reachable = accessible_delays(topology, source).delays
    cells = "  ".join("x" if d in reachable else "." for d in range(topology.delay_count))
    print(f" {source:>2}   ({low},{high})    {cells}")

print()
print("row 2 in detail: every delay is a choice of stages to take")
for path in enumerate_delay_paths(topology, 2):
    stages = "+".join(str(s) for s in path.steps) if path.steps else "bypass all"
    print(f"  delay {path.delay}: {stages}")

print()
print("note the mirror symmetry: row i reaching delay d is the same")
print("statement as row 12-i reaching delay 7-d, the bank upside down")
