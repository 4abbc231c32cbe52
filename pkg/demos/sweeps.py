"""
Parameter sweeps
================

Mean equilibrium price and operator utility over 20 fleets per point, for
the four swept parameters. Spec files for the same runs live in
scenarios/ and can be fed to ``mesgame sweep``.
"""

from mesgame.sweep import default_spec, run_sweep

for parameter in ("capacity_mean", "fleet_size", "loading_weight", "degradation_weight"):
    series = run_sweep(default_spec(parameter), jobs=2)
    values, price, util = series.means()
    print(f"\n{parameter}")
    print("      value      price    utility")
    for v, p, u in zip(values, price, util):
        print(f"  {v:9.4g}  {p:9.5f}  {u:9.3f}")
    onset = series.saturation_onset()
    if onset is not None:
        print(f"  an LCS sits at its demand cap for every fleet from {onset:g} on")
