"""Compare the numba and numpy CRF kernels.

Kernel timings run both backends in this process on identical random score
tables and check that they agree. ``--train`` additionally times a short
training run in a subprocess per backend, selected through PTNER_DISABLE_NUMBA.

    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --lengths 10 40 --types 5 --train
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from ptner.crf import _numpy_kernels

try:
    from ptner.crf import _numba_kernels
except ImportError:
    _numba_kernels = None

KERNELS = ("forward", "marginals", "viterbi", "best_outside")

TRAIN_SNIPPET = """
import time
from ptner.crf import BACKEND_NAME
from ptner.synthetic import SyntheticConfig, generate
from ptner.features import FeatureVocab, extract_sentence
from ptner.trainer import TrainConfig, train_regime
c = generate(SyntheticConfig(train={n}, dev=50, test=1))
vocab = FeatureVocab.build(s.tokens for s in c["train"])
t0 = time.perf_counter()
train_regime([c["train"]], "partial", vocab, TrainConfig(epochs={epochs}))
print(BACKEND_NAME, time.perf_counter() - t0)
"""


def random_instance(rng, length, n_labels):
    emit = rng.normal(size=(length, n_labels))
    trans = rng.normal(size=(n_labels, n_labels))
    start, stop = rng.normal(size=n_labels), rng.normal(size=n_labels)
    allowed = rng.random((length, n_labels)) < 0.5
    allowed[np.arange(length), rng.integers(0, n_labels, length)] = True
    return emit, trans, start, stop, allowed


def time_kernel(fn, instances, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        for args in instances:
            fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best / len(instances)


def check_agreement(instances):
    for args in instances:
        a = _numpy_kernels.marginals(*args)
        b = _numba_kernels.marginals(*args)
        assert np.allclose(a[0], b[0], atol=1e-10) and abs(a[2] - b[2]) < 1e-10
        assert _numpy_kernels.viterbi(*args)[0].tolist() == _numba_kernels.viterbi(*args)[0].tolist()


def bench_kernels(lengths, n_types, n_instances, repeat, seed):
    n_labels = 4 * n_types + 1
    rng = np.random.default_rng(seed)
    backends = [("numpy", _numpy_kernels)]
    if _numba_kernels is not None:
        backends.append(("numba", _numba_kernels))
    print(f"labels={n_labels} instances={n_instances} (best of {repeat}, microseconds per call)")
    print(f"{'kernel':<14}{'T':>5}" + "".join(f"{name:>12}" for name, _ in backends) + f"{'speedup':>10}")
    for T in lengths:
        instances = [random_instance(rng, T, n_labels) for _ in range(n_instances)]
        if _numba_kernels is not None:
            for name in KERNELS:  # compile outside the timed region
                getattr(_numba_kernels, name)(*instances[0])
            check_agreement(instances[:20])
        for name in KERNELS:
            times = [time_kernel(getattr(mod, name), instances, repeat) for _, mod in backends]
            speed = f"{times[0] / times[1]:>9.1f}x" if len(times) > 1 else ""
            print(f"{name:<14}{T:>5}" + "".join(f"{1e6 * t:>12.1f}" for t in times) + speed)


def bench_training(n, epochs):
    print(f"\ntraining: partial regime, {n} sentences, {epochs} epochs (seconds)")
    for flag in ("1", "0"):
        env = dict(os.environ, PTNER_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", TRAIN_SNIPPET.format(n=n, epochs=epochs)],
                             env=env, capture_output=True, text=True, check=True)
        name, secs = out.stdout.split()
        print(f"{name:<8}{float(secs):>8.2f}")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--lengths", type=int, nargs="+", default=[5, 20, 60])
    p.add_argument("--types", type=int, default=3)
    p.add_argument("--instances", type=int, default=200)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train", action="store_true", help="also time a short training run per backend")
    p.add_argument("--train-size", type=int, default=400)
    p.add_argument("--train-epochs", type=int, default=2)
    args = p.parse_args()
    bench_kernels(args.lengths, args.types, args.instances, args.repeat, args.seed)
    if args.train:
        bench_training(args.train_size, args.train_epochs)


if __name__ == "__main__":
    main()
