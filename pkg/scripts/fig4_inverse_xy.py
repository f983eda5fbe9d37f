"""Reachability map of U_c(ax, ay, pi/6) with x rotations on A and y rotations on B."""
from _common import RESULTS, run

if __name__ == "__main__":
    run("inverse-scan", "--alpha-z", "pi/6", "--rot-axes", "x,y", "--grid-step", "pi/40",
        "--rot-step", "pi/100", "--gamma-step", "0.02", "--out", RESULTS / "fig4_xy.csv")
