"""Reachability map of U_c(ax, ay, 0) with z-axis local rotations (about a minute)."""
from _common import RESULTS, run

if __name__ == "__main__":
    run("inverse-scan", "--alpha-z", "0", "--rot-axes", "z,z", "--grid-step", "pi/40",
        "--rot-step", "pi/100", "--gamma-step", "0.02", "--out", RESULTS / "fig3_zz.csv")
