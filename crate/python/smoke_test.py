"""Builds the extension module and exercises it end to end.

    python3 python/smoke_test.py
"""

import shutil
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
HERE = Path(__file__).resolve().parent


def build():
    subprocess.run(["cargo", "build", "--release", "-p", "sachi-py"], cwd=ROOT, check=True)
    lib = ROOT / "target" / "release" / "libsachi.so"
    if not lib.exists():
        lib = ROOT / "target" / "release" / "libsachi.dylib"
    shutil.copy(lib, HERE / "sachi.so")


def main():
    build()
    sys.path.insert(0, str(HERE))
    import sachi

    assert sachi.DESIGNS == ["n1a", "n1b", "n2", "n3"]
    for r in (2, 4, 8):
        lo, hi = -(1 << (r - 1)), (1 << (r - 1)) - 1
        for j in range(lo, hi + 1):
            for s in (1, -1):
                assert sachi.xnor_dot(j, s, r) == j * s
    assert sachi.encode_ic(-1, 4) == 0b1111

    g = sachi.Graph(3, 4, [(0, 1, 3), (1, 2, -2)], [1, 0, 0])
    g.spins = [1, -1, 1]
    assert g.hamiltonian() == -(3 * -1 + -2 * -1) - 1
    assert g.local_field(1) == -(3 + -2)
    assert sachi.Graph.parse(g.render()).edges() == g.edges()

    g = sachi.Graph.benchmark("molecular", 64, 4, seed=3)
    ref = sachi.solve(g, seed=3)
    arch = sachi.solve_arch(g, "n3", seed=3)
    assert arch["result"]["hamiltonian_trace"] == ref["hamiltonian_trace"]
    assert arch["result"]["final_hamiltonian"] <= ref["initial_hamiltonian"]

    cpi = {d: sachi.analyze(g, d)["cycles"] for d in sachi.DESIGNS}
    assert cpi["n3"] <= cpi["n2"] <= cpi["n1b"] <= cpi["n1a"], cpi
    assert sachi.cost(g, "n3")["total_energy"] < sachi.cost(g, "n1a")["total_energy"]
    assert sachi.loading_cost(g)["cycles"] > 0

    rows = sachi.compare(g, "molecular", iterations=50)
    assert len(rows) == 14
    print(f"smoke test ok: cpi {cpi}, H {ref['initial_hamiltonian']} -> {ref['final_hamiltonian']}")


if __name__ == "__main__":
    main()
