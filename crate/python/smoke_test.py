"""Smoke test for the Python extension.

Build first:  cargo build --release -p qattack-py --features extension-module
Then run:     python3 python/smoke_test.py [path/to/libqattack_py.so]
"""
import importlib.util
import json
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def find_library():
    if len(sys.argv) > 1:
        return Path(sys.argv[1])
    for profile in ("release", "debug"):
        p = ROOT / "target" / profile / "libqattack_py.so"
        if p.exists():
            return p
    sys.exit("libqattack_py.so not found; build the qattack-py crate first")


def import_extension(lib):
    tmp = Path(tempfile.mkdtemp())
    dest = tmp / "qattack_py.so"
    shutil.copy(lib, dest)
    spec = importlib.util.spec_from_file_location("qattack_py", dest)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def main():
    q = import_extension(find_library())
    labels, edges, truth = q.load("karate")
    n = len(labels)
    assert (n, len(edges), len(set(truth))) == (34, 78, 2)

    q_truth = q.modularity(n, edges, truth)
    assert abs(q_truth - 0.3715) < 1e-3, q_truth

    fn = q.detect(n, edges, "fn")
    q_fn = q.modularity(n, edges, fn)
    assert abs(q_fn - 0.381) < 0.01, q_fn
    assert q.nmi(fn, fn) == 1.0

    soa = q.detect(n, edges, "soa")
    assert q.nmi(soa, truth) == 1.0

    report = json.loads(q.attack("karate", "qattack", "fn", "4", seed=1, generations=30))
    assert len(report["plan"]) == 4
    assert report["q_after"] < report["q_before"]

    try:
        q.detect(3, [(0, 0)], "fn")
    except ValueError:
        pass
    else:
        raise AssertionError("self-loop accepted")

    print(f"ok: truth Q {q_truth:.4f}, FN Q {q_fn:.4f}, "
          f"Q-Attack T=4 Q {report['q_before']:.4f} -> {report['q_after']:.4f}")


if __name__ == "__main__":
    main()
