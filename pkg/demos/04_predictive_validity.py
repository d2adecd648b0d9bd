#!/usr/bin/env python3
"""Run the number-of-failures predictive-validity harness.

For each simulated project the model is refitted on a growing prefix of
the history (cuts at fractions of the observation window) and asked to
predict the final failure count; the relative error against normalized
time makes models comparable across projects.  Medians per cell combine
projects without letting one far-off project cancel or dominate the rest.
"""

import numpy as np

from geomrel import (
    GeometricModelParams,
    SimulationConfig,
    ValidityCurve,
    aggregate_median,
    aggregate_to_csv,
    curve_to_csv,
    number_of_failures_eval,
    outlier_report,
    simulate,
)

true = GeometricModelParams(p1=0.08, d=0.96)
projects = simulate(SimulationConfig(params=true, horizon=600, seed=11, replications=3))

print("per-project validity curves (geometric-rates model):")
curves = []
for ds in projects:
    curve = number_of_failures_eval("geometric", ds, cut_points=None)  # default: 20 cuts
    curves.append(curve)
    errs = [e for _, e in curve.points]
    print(
        f"  {ds.label}: {len(curve.points)} points, {len(curve.skipped)} gaps, "
        f"first error {errs[0]:+.3f}, final error {errs[-1]:+.3f}"
    )

aggregate = aggregate_median(curves, grid_cells=10)
print("\nmedian curve across projects:")
print(f"  {'cell':>12} {'median error':>13} {'projects':>9}")
for cell in aggregate.cells:
    print(
        f"  ({cell.lower:.1f}, {cell.upper:.1f}] {cell.median_relative_error:>+13.3f} "
        f"{cell.contributing_project_count:>9}"
    )

# A deliberately broken stub curve shows what the outlier report is for:
# the harness never excludes anything silently, it only points fingers.
stub = ValidityCurve("geometric", "far-off-project", tuple((nt, 6.0) for nt, _ in curves[0].points))
report = outlier_report(curves + [stub], threshold=5.0)
print("\nprojects exceeding |relative error| 5.0:")
for label, worst in report:
    print(f"  {label}: worst {worst:.1f}")

print("\nplot-ready CSV (first lines):")
print("\n".join(curve_to_csv(curves[0]).splitlines()[:4]))
print("...")
print("\n".join(aggregate_to_csv(aggregate).splitlines()[:4]))
