"""Regenerate the committed MSC circuits and colour-code data files.

Run from the repository root:  python3 tools/gen_msc.py
"""

from __future__ import annotations

import json
from pathlib import Path

from zxcut.circuit import Circuit, circuit_to_diagram, print_circuit
from zxcut.decompose import CutSchedule, CutStats, run_cutting

DATA = Path(__file__).resolve().parents[1] / "src" / "zxcut" / "data"

# d=3 triangular colour code on output legs 0..6
D3_FACES = [[0, 1, 3, 5], [1, 2, 3, 4], [3, 4, 5, 6]]
# generators in reduced form: pivot qubit first, it appears in no other row
D3_ENCODER = [(5, [0, 1, 3]), (4, [1, 2, 3]), (6, [0, 2, 3])]
D3_SEED = 0
D3_LOGICAL = [0, 1, 2]

# d=5 code on output legs 0..18; legs 0..6 are the d=3 block sitting in a corner
D5_FACES = [
    [7, 8, 9, 11], [9, 11, 12, 14], [2, 4, 7, 9, 10, 12], [1, 2, 3, 4],
    [10, 12, 13, 14, 15, 16], [3, 4, 5, 6, 10, 13], [0, 1, 3, 5],
    [15, 16, 17, 18], [6, 13, 15, 17],
]
# the d=5 extensions of the d=3 logicals X(0,1,2) and Z(0,5,6)
D5_X_LOGICAL = [0, 1, 2, 7, 8]
D5_Z_LOGICAL = [0, 5, 6, 17, 18]
# T or T-dagger per data qubit so that the transversal check stabilises |T_L>
D5_CHECK_SIGNS = [-1, -1, -1, 1, 1, 1, 1, -1, -1, 1, -1, 1, 1, 1, 1, 1, 1, 1, 1]


def _pair(tag: str) -> dict:
    return {"version": 1, "cuts": [[{"label": f"{tag}.check1"}, {"label": f"{tag}.check2"}]]}


# explicit schedules: both check hubs of one double check, cut together
SCHEDULES = {
    "schedule_msc_d3.json": _pair("d3"),
    "schedule_msc_d5_reuse.json": _pair("d5"),
    "schedule_msc_d5_naive.json": _pair("d5"),
}


def stabiliser_round(c: Circuit, data: list[int], faces: list[list[int]], first_ancilla: int) -> int:
    a = first_ancilla
    for f in faces:
        c.append("INITP", a)
        for q in f:
            c.append("CX", a, data[q])
        c.append("MXPS", a)
        a += 1
    for f in faces:
        c.append("INIT0", a)
        for q in f:
            c.append("CX", data[q], a)
        c.append("MZPS", a)
        a += 1
    return a


def double_check(c: Circuit, data: list[int], signs: list[int], ancillas: tuple[int, int], tag: str) -> None:
    for q, s in zip(data, signs):
        c.append("T" if s > 0 else "TDG", q)
    for k, a in enumerate(ancillas, start=1):
        c.append("INITP", a)
        for q in data:
            c.append("CX", a, q)
        c.append("MXPS", a, label=f"{tag}.check{k}")
    for q, s in zip(data, signs):
        c.append("TDG" if s > 0 else "T", q)


def d3_block(c: Circuit) -> None:
    data = list(range(7))
    start = len(c.instructions)
    c.append("INITP", D3_SEED)
    c.append("TDG", D3_SEED, label="inject")
    c.append("X", D3_SEED)
    pivots = {p for p, _ in D3_ENCODER}
    for q in data:
        if q != D3_SEED:
            c.append("INITP" if q in pivots else "INIT0", q)
    for q in D3_LOGICAL:
        if q != D3_SEED:
            c.append("CX", D3_SEED, q)
    for p, rest in D3_ENCODER:
        for q in rest:
            c.append("CX", p, q)
    stabiliser_round(c, data, D3_FACES, 7)
    mid = len(c.instructions)
    double_check(c, data, [1] * 7, (13, 14), "d3")
    c.regions["d3.injection"] = (start, mid)
    c.regions["d3.check"] = (mid, len(c.instructions))


def msc_d3() -> Circuit:
    c = Circuit(15)
    d3_block(c)
    return c


def msc_d5() -> Circuit:
    c = Circuit(47)
    d3_block(c)
    c.regions["d3"] = (0, len(c.instructions))
    data = list(range(7)) + list(range(15, 27))
    grow = len(c.instructions)
    for pos in range(7, 19):
        c.append("INITP" if pos in D5_X_LOGICAL else "INIT0", data[pos])
    stabiliser_round(c, data, D5_FACES, 27)
    mid = len(c.instructions)
    double_check(c, data, D5_CHECK_SIGNS, (45, 46), "d5")
    c.regions["d5.growth"] = (grow, mid)
    c.regions["d5.check"] = (mid, len(c.instructions))
    return c


def main() -> None:
    header = {
        "msc_d3.zxcirc": "# d=3 cultivation: degenerate injection, one stabiliser round, double check.\n",
        "msc_d5.zxcirc": "# d=5 cultivation: the d=3 protocol, growth to d=5, double check.\n",
    }
    for name, circ in (("msc_d3.zxcirc", msc_d3()), ("msc_d5.zxcirc", msc_d5())):
        (DATA / name).write_text(header[name] + print_circuit(circ))
    codes = {
        3: {"distance": 3, "n": 7, "faces": D3_FACES, "x_logical": D3_LOGICAL, "z_logical": [0, 5, 6]},
        5: {
            "distance": 5, "n": 19, "faces": D5_FACES, "x_logical": D5_X_LOGICAL,
            "z_logical": D5_Z_LOGICAL, "check_signs": D5_CHECK_SIGNS,
        },
    }
    for dist, obj in codes.items():
        (DATA / f"colour_code_d{dist}.json").write_text(json.dumps(obj, indent=1) + "\n")
    for name, obj in SCHEDULES.items():
        (DATA / name).write_text(json.dumps(obj, indent=1) + "\n")
    # the stored d=3 result that the d=5 reuse strategy substitutes
    stats = CutStats()
    sched = CutSchedule.from_json(SCHEDULES["schedule_msc_d3.json"])
    s = run_cutting(circuit_to_diagram(msc_d3()), sched, target_t=1, stats=stats)
    stored = {"version": 1, "stats": {"cuts": stats.cuts}, "terms": [t.to_json() for t in s.terms]}
    (DATA / "d3_decomposition.json").write_text(json.dumps(stored, indent=1) + "\n")


if __name__ == "__main__":
    main()
