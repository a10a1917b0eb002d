"""Scaling check on a synthetic chain of diamonds.

The whole step is vectorized across arcs, so cost grows linearly in the
cell count and junction count; a few thousand arcs step well under a
second.  Numbers depend on the machine, the shape of the curve should
not.
"""

from tagflow import run_bench

print(f"{'arcs':>6} {'cells':>7} {'steps':>6} {'wall [s]':>9} {'updates/s':>11} {'residual':>10}")
for arcs in (250, 500, 1000, 2000):
    report = run_bench(arcs, 25, 500)
    print(
        f"{report.n_arcs:6d} {report.total_cells:7d} {report.steps:6d}"
        f" {report.wall_time_s:9.3f} {report.cell_updates_per_s:11.3e}"
        f" {report.mass_residual:10.2e}"
    )
print()
print("conservation is re-verified on every row (residual column)")
