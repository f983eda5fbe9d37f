"""Check the three source-to-MEMS identities on the default grids."""
from _common import run

if __name__ == "__main__":
    run("theorem-check", "--gamma-step", "0.01", "--chi-step", "pi/40")
