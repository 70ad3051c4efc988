"""Print Bethe roots next to the spectra of the quantum exterior powers.

    python3 scripts/spectrum_table.py --n 3 --z 0.25
"""

import argparse

import numpy as np

from xxzqk.bethe import BetheSystem, solve_all
from xxzqk.config import ParamsBlock
from xxzqk.core import FixedPoint, elementary, parse_complex
from xxzqk.qop import quantum_exterior


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--hbar", default="0.35")
    ap.add_argument("--z", default="0.25")
    args = ap.parse_args()

    params = ParamsBlock(n=args.n, hbar=args.hbar).build()
    z = parse_complex(args.z)
    n = params.n
    print(f"n={n} hbar={args.hbar} z={args.z}")
    for k in range(1, n + 1):
        sols = solve_all(BetheSystem(n, k, params, "geometric", z))
        spectra = [np.linalg.eigvals(np.asarray(quantum_exterior(l, z, params).block(k), dtype=complex))
                   for l in range(1, k + 1)]
        print(f"\nsector k={k}")
        for sol in sols:
            roots = [complex(s) for s in sol.roots]
            cols = []
            for l, spec in enumerate(spectra, start=1):
                e = elementary(roots, l)
                gap = float(np.min(np.abs(spec - e)))
                cols.append(f"e{l}={e:.6f} (|d|={gap:.1e})")
            print(f"  {FixedPoint(sol.origin, n).label():<10} " + "  ".join(cols))


if __name__ == "__main__":
    main()
