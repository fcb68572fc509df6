#!/usr/bin/env python3
"""Regenerates corpus/rwt_corpus.json, the fixed set-pair corpus.

The output is deterministic; rerunning must reproduce the committed file.
"""

import argparse
import itertools
import json
import random
from pathlib import Path

VERSION = "1"


def box(lo, hi):
    return {"lo": [float(v) for v in lo], "hi": [float(v) for v in hi]}


def unit(d):
    return [box([0.0] * d, [1.0] * d)]


def centered(center, half):
    return box([c - h for c, h in zip(center, half)], [c + h for c, h in zip(center, half)])


def piece_a(d, k):
    center = [0.0] + [float(k ** j) for j in range(2, d + 1)]
    return [centered(center, [k ** -j for j in range(1, d + 1)])]


def piece_b(d, k):
    center = [0.0] + [float(k ** j) for j in range(2, d + 1)]
    return [centered(center, [0.5 * k ** -j for j in range(1, d + 1)])]


def lattice_union(d, cells, count, rng):
    all_cells = list(itertools.product(range(cells), repeat=d))
    picked = sorted(rng.sample(all_cells, count))
    w = 1.0 / cells
    return [box([c * w for c in cell], [(c + 1) * w for c in cell]) for cell in picked]


def in_union(p, boxes):
    return any(all(b["lo"][i] <= p[i] <= b["hi"][i] for i in range(len(p))) for b in boxes)


def has_incidence(E, F, I, rng, samples=20000):
    """Monte Carlo witness that T(E, F) > 0."""
    d = len(E[0]["lo"])
    for _ in range(samples):
        b = rng.choice(F)
        x = [rng.uniform(b["lo"][i], b["hi"][i]) for i in range(d)]
        s = rng.uniform(I[0], I[1])
        y = [s] + [x[j] + s * x[0] ** j for j in range(1, d)]
        if in_union(y, E):
            return True
    return False


def scaled(boxes, delta):
    out = []
    for b in boxes:
        f = [delta ** (j + 1) for j in range(len(b["lo"]))]
        out.append(box([v * s for v, s in zip(b["lo"], f)], [v * s for v, s in zip(b["hi"], f)]))
    return out


def build():
    entries = []

    def add(eid, d, kind, I, E, F):
        entries.append({"id": eid, "d": d, "kind": kind, "I": list(map(float, I)), "E": E, "F": F})

    for d in (2, 3):
        lo = [0.0] * d
        add(f"d{d}-unit", d, "unit", (0, 1), unit(d), unit(d))
        add(f"d{d}-box-a", d, "boxes", (0, 1), unit(d), [box([0.2] * d, [0.7] * d)])
        add(f"d{d}-box-b", d, "boxes", (0, 1), [box([0.1] * d, [0.6] * d)], unit(d))
        add(f"d{d}-box-c", d, "boxes", (-1, 1), [box([-0.5] * d, [0.5] * d)],
            [box([-0.25] * d, [0.75] * d)])
        add(f"d{d}-slab-a", d, "slab", (0, 1), unit(d),
            [box(lo, [1.0] * (d - 1) + [0.05])])
        add(f"d{d}-slab-b", d, "slab", (0, 1), [box(lo, [0.05] + [1.0] * (d - 1))], unit(d))
        for k in (2, 4, 8):
            add(f"d{d}-piece-k{k}", d, "counterexample", (0, 1), piece_a(d, k), piece_b(d, k))
        rng = random.Random(1000 + d)
        made = 0
        while made < 4:
            E = lattice_union(d, 4, 6, rng)
            F = lattice_union(d, 4, 6, rng)
            if not has_incidence(E, F, (0.0, 1.0), rng):
                continue
            add(f"d{d}-random-{made}", d, "random", (0, 1), E, F)
            made += 1
        base = [e for e in entries if e["d"] == d and e["kind"] in ("unit", "boxes")][:3]
        for e, delta in zip(base, (0.5, 2.0, 0.25)):
            I = [delta * v for v in e["I"]]
            add(f"{e['id']}-scaled-{delta:g}", d, "scaled", I, scaled(e["E"], delta),
                scaled(e["F"], delta))
    return {"version": VERSION, "entries": entries}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--output", default=str(Path(__file__).resolve().parent.parent / "corpus" / "rwt_corpus.json"))
    args = ap.parse_args()
    Path(args.output).write_text(json.dumps(build(), indent=1) + "\n")


if __name__ == "__main__":
    main()
