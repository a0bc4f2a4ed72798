"""Lipschitz shadowing: the shadowing error scales linearly with the defect.

For a hyperbolic map, every d-pseudo-orbit is shadowed by a true orbit
within L* d.  The sweep pipeline shadows one pseudo-orbit per defect level
and fits the slope of log(sup error) against log(d); a slope near one is
the Lipschitz scaling.  The plot data is written to sweep.csv.
"""
import sys
import tempfile

from shadowlab import ExperimentConfig, sweep

out = sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp(prefix="shadowlab-sweep-")
cfg = ExperimentConfig(preset="linear_diag", params={"diag": [0.5, 2.0]}, output_dir=out)
report = sweep(cfg, d_values=[1e-3, 1e-4, 1e-5, 1e-6])

print(f"status: {report.status}")
print(f"{'d':>10} {'sup error':>12} {'L* d':>12}")
for d, err, bound in report.extra["rows"]:
    print(f"{d:10.3e} {err:12.3e} {bound:12.3e}")
print(f"log-log slope: {report.extra['slope']:.4f}")
print(f"plot data: {out}/sweep.csv")
