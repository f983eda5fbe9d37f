"""Entangling power over classical-classical inputs for a few kernels.

Writes results/fig1_<gate>_<seeding>.csv; compare each against
results/mems_reference.csv.
"""
from _common import RESULTS, run

from entpower.search import mems_eof_curve, mu_bins

GATES = {"pe": "0.125pi,0.125pi,0", "cnot": "0.25pi,0,0", "weak": "0.1pi,0,0"}

if __name__ == "__main__":
    _, centers = mu_bins(1 / 3, 1, 0.01)
    ref = mems_eof_curve(centers)
    with open(RESULTS / "mems_reference.csv", "w") as fh:
        fh.write("mu,ep\n")
        for m, e, _ in ref.rows():
            fh.write("%.17g,%.17g\n" % (m, e))
    for name, gate in GATES.items():
        for seeding in ("off", "on"):
            run("ep-scan", "--gate", gate, "--source", "cc", "--samples", 1000, "--seed", 0,
                "--oracle-seeding", seeding, "--out", RESULTS / f"fig1_{name}_{seeding}.csv")
