"""Compare the compiled and pure-Python term kernels on realistic loads.

Runs each workload in a subprocess with ZGRADED_KERNEL forced, so the
import-time selection is exercised exactly as in production.

    python3 benchmarks/bench_kernel.py [--repeat N]
"""

import argparse
import json
import os
import subprocess
import sys
import textwrap
import time

WORKLOAD = textwrap.dedent("""
    import json, random, time
    from fractions import Fraction
    from zgraded import kernel
    from zgraded.algebra import GeneratorTable
    from zgraded.derivations import Derivation, is_homological
    from zgraded.lie2 import SplitLie2Data, check_axioms, q_from_data
    from zgraded.poisson import MultivectorAlgebra, check_poisson

    def random_element(rng, t, terms=4, factors=3):
        out = t.zero()
        for _ in range(terms):
            term = t.scalar(Fraction(rng.randint(-4, 4) or 1, rng.randint(1, 3)))
            for _ in range(rng.randint(0, factors)):
                term = term * t.gen(rng.choice(t.names))
            out = out + term
        return out

    results = {}

    # workload 1: raw products in a mixed table
    t = GeneratorTable([("x", 0), ("y", 0), ("t1", 1), ("t2", 1), ("b", 2)])
    rng = random.Random(42)
    elems = [random_element(rng, t) for _ in range(60)]
    start = time.perf_counter()
    acc = t.zero()
    for a in elems:
        for b in elems:
            acc = acc + a * b
    results["element products"] = time.perf_counter() - start

    # workload 2: homological-field checks on a graded table
    t2 = GeneratorTable([(f"e{i}", 1) for i in range(1, 4)])
    q = Derivation(t2, 1, {
        "e1": t2.parse("-e2*e3"), "e2": t2.parse("-e3*e1"), "e3": t2.parse("-e1*e2"),
    })
    start = time.perf_counter()
    for _ in range(200):
        assert is_homological(q).passed
    results["Q^2 checks"] = time.perf_counter() - start

    # workload 3: split Lie 2-algebroid axioms over a polynomial base
    data = SplitLie2Data(["x"], ["q1", "q2"], ["b1"])
    tt = data.table
    data.dull.anchor[0]["x"] = tt.one()
    data.conn[(0, 0)] = [tt.gen("x")]
    start = time.perf_counter()
    for _ in range(20):
        assert check_axioms(data).passed
        assert is_homological(q_from_data(data)).passed
    results["lie2 axiom checks"] = time.perf_counter() - start

    # workload 4: Schouten brackets on R^3 bivectors
    t3 = GeneratorTable([("x", 0), ("y", 0), ("z", 0)])
    mv = MultivectorAlgebra(t3, 0)
    rng = random.Random(3)
    start = time.perf_counter()
    for _ in range(8):
        pi = mv.table.zero()
        for a, b in (("x", "y"), ("y", "z"), ("x", "z")):
            pi = pi + mv.include(random_element(rng, t3, terms=2)) * mv.conj(a) * mv.conj(b)
        check_poisson(pi, mv)
    results["Schouten/Poisson checks"] = time.perf_counter() - start

    print(json.dumps({"impl": kernel.IMPL, "results": results}))
""")


def run_with(impl: str) -> dict:
    env = dict(os.environ, ZGRADED_KERNEL=impl)
    proc = subprocess.run([sys.executable, "-c", WORKLOAD], env=env,
                          capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"workload failed under {impl}: {proc.stderr}")
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3, help="best-of-N runs")
    args = ap.parse_args()

    timings = {}
    for impl in ("py", "c"):
        try:
            runs = [run_with(impl) for _ in range(args.repeat)]
        except RuntimeError as exc:
            if impl == "c":
                print(f"compiled kernel unavailable ({exc}); build it with:")
                print("    python3 setup.py build_ext --inplace")
                continue
            raise
        assert all(r["impl"] == impl for r in runs)
        best = {}
        for name in runs[0]["results"]:
            best[name] = min(r["results"][name] for r in runs)
        timings[impl] = best

    if "py" not in timings:
        return 1
    names = list(timings["py"])
    width = max(len(n) for n in names)
    header = f"{'workload'.ljust(width)}   pure-py      compiled     speedup"
    print(header)
    print("-" * len(header))
    for name in names:
        py_t = timings["py"][name]
        if "c" in timings:
            c_t = timings["c"][name]
            print(f"{name.ljust(width)}   {py_t:8.4f}s    {c_t:8.4f}s    {py_t / c_t:5.2f}x")
        else:
            print(f"{name.ljust(width)}   {py_t:8.4f}s    (not built)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
