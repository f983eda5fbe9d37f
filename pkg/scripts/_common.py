import os
import sys
from pathlib import Path

from entpower.cli import main

RESULTS = Path(os.environ.get("ENTPOWER_RESULTS", Path(__file__).resolve().parent.parent / "results"))


def run(*argv) -> None:
    RESULTS.mkdir(parents=True, exist_ok=True)
    argv = [str(a) for a in argv]
    print("entpower", " ".join(argv), flush=True)
    code = main(argv)
    if code:
        sys.exit(code)
