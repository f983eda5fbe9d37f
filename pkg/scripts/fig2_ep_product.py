"""Entangling power over product inputs, binned by total purity (step 0.01)."""
from _common import RESULTS, run

if __name__ == "__main__":
    for name, gate in {"pe": "0.125pi,0.125pi,0", "cnot": "0.25pi,0,0"}.items():
        run("ep-scan", "--gate", gate, "--source", "product", "--samples", 1000, "--seed", 0,
            "--sampling", "binned", "--oracle-seeding", "off",
            "--out", RESULTS / f"fig2_{name}_binned.csv")
        run("ep-scan", "--gate", gate, "--source", "product", "--samples", 1000, "--seed", 0,
            "--oracle-seeding", "on", "--out", RESULTS / f"fig2_{name}_seeded.csv")
