#!/usr/bin/env python3
"""Fit all five models to a classic public failure history.

The dataset is the NTDS (Naval Tactical Data System) production-phase
record: 26 software failures over 250 days, given as times between
failures.  Every model is fitted with the same in-house machinery (log
least squares on the mean value function; marginal likelihood for the
TBF-native Littlewood-Verrall model), so differences reflect model shape,
not toolchain.
"""

from pathlib import Path

from geomrel import ALL_MODEL_NAMES, fit_model, parse_dataset

data_path = Path(__file__).resolve().parent.parent / "data" / "ntds_tbf.csv"
with open(data_path, "rb") as handle:
    ds = parse_dataset(handle, "tbf_csv", label="ntds")

print(f"dataset: {ds.label}, {ds.final_count} failures over {ds.final_time:.0f} days\n")

fitted = {}
for name in ALL_MODEL_NAMES:
    model = fit_model(name, ds)
    fitted[name] = model
    pieces = ", ".join(f"{k}={v:.4g}" for k, v in model.params_dict().items())
    print(f"{name:>20}: {pieces}")

print("\npredicted cumulative failures:")
header = f"  {'t (days)':>9} " + " ".join(f"{name:>19}" for name in ALL_MODEL_NAMES)
print(header)
for t in (50, 125, 250, 500):
    row = f"  {t:>9} "
    row += " ".join(f"{fitted[name].predict_mean(float(t)):>19.1f}" for name in ALL_MODEL_NAMES)
    print(row)

print(
    "\nnote: the bounded models (musa-basic, nhpp and, through its fault"
    "\npopulation, the geometric-rates model) level off beyond the observed"
    "\nwindow, while musa-okumoto keeps growing logarithmically and"
    "\nlittlewood-verrall extrapolates its expected times between failures."
)
