"""Frozen reference fronts for the default benchmarks.

Regenerate with ``python -m moapg.refdata``.
"""

from __future__ import annotations

from pathlib import Path

from .bench import BenchmarkSpec, make_problem
from .merit import ReferenceFront, build_reference_front

DATA_DIR = Path(__file__).parent / "data"

REF_STARTS = 1000
REF_SEED = 12345
REF_ITERS = 2000

FROZEN = [
    BenchmarkSpec("BK1", l1_weight=0.1),
    BenchmarkSpec("BK1", l1_weight=0.0),
    BenchmarkSpec("JOS1", n=50, l1_weight=0.1),
    BenchmarkSpec("JOS1", n=50, l1_weight=0.0),
    BenchmarkSpec("SP1", l1_weight=0.1),
    BenchmarkSpec("SP1", l1_weight=0.0),
]


def path_for(spec: BenchmarkSpec) -> Path:
    return DATA_DIR / f"ref_{spec.name}_n{spec.n}_l1_{spec.l1_weight:g}.csv"


def build(spec: BenchmarkSpec) -> ReferenceFront:
    problem = make_problem(spec)
    return build_reference_front(problem, *spec.start_box, num_starts=REF_STARTS,
                                 seed=REF_SEED, max_iters=REF_ITERS)


def lookup(spec: BenchmarkSpec) -> ReferenceFront | None:
    """The frozen front for ``spec`` if one exists for the same problem and start box."""
    path = path_for(spec)
    if not path.exists():
        return None
    ref = ReferenceFront.load(path)
    if ref.provenance.get("start_box") != [list(spec.start_box[0]), list(spec.start_box[1])]:
        return None
    return ref


def main() -> None:
    DATA_DIR.mkdir(exist_ok=True)
    for spec in FROZEN:
        ref = build(spec)
        ref.save(path_for(spec))
        print(path_for(spec).name, len(ref))


if __name__ == "__main__":
    main()
