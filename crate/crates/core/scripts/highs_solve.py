#!/usr/bin/env python3
"""Solve an MPS model with HiGHS and write a `<name> <value>` solution file.

Usage: highs_solve.py MODEL.mps SOLUTION.sol [MIP_GAP] [TIME_LIMIT_S]

Uses the `highspy` package when available and falls back to
`scipy.optimize.milp` (which also runs HiGHS) otherwise. The output starts
with `# Status = ...`, `# Objective value = ...` and `# MIP gap = ...`
header lines. Exit status is 0 whenever a status could be determined.
"""

import math
import sys


def write_solution(path, status, objective, gap, names, values):
    with open(path, "w", encoding="ascii") as out:
        out.write(f"# Status = {status}\n")
        if objective is not None:
            out.write(f"# Objective value = {objective!r}\n")
        if gap is not None:
            out.write(f"# MIP gap = {gap!r}\n")
        for name, value in zip(names, values):
            out.write(f"{name} {float(value)!r}\n")


def solve_highspy(model, solution, gap, time_limit):
    import highspy

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", gap)
    if math.isfinite(time_limit):
        h.setOptionValue("time_limit", time_limit)
    if h.readModel(model) != highspy.HighsStatus.kOk:
        sys.exit(f"HiGHS cannot read {model}")
    h.run()
    status = h.getModelStatus()
    info = h.getInfo()
    lp = h.getLp()
    names = list(lp.col_names_)
    has_values = info.primal_solution_status == 2  # feasible
    ms = highspy.HighsModelStatus
    if status == ms.kOptimal:
        label = "optimal"
    elif status in (ms.kInfeasible, ms.kUnboundedOrInfeasible):
        label = "infeasible"
    elif status == ms.kTimeLimit:
        label = "time-limit"
    else:
        sys.exit(f"HiGHS stopped with status {h.modelStatusToString(status)}")
    values = list(h.getSolution().col_value) if has_values else []
    objective = info.objective_function_value if has_values else None
    mip_gap = info.mip_gap if has_values and math.isfinite(info.mip_gap) else None
    write_solution(solution, label, objective, mip_gap, names if values else [], values)


def read_mps(path):
    """Minimal free-form MPS reader for the files written by merroute."""
    rows, sense, obj_row = {}, "MIN", None
    cols, col_index, integer = [], {}, []
    entries = {}
    rhs = {}
    bounds = {}
    section, in_int = None, False
    with open(path, encoding="ascii") as f:
        for line in f:
            if not line.strip() or line.startswith("*"):
                continue
            if not line[0].isspace():
                section = line.split()[0]
                continue
            tok = line.split()
            if section == "OBJSENSE":
                sense = tok[0]
            elif section == "ROWS":
                kind, name = tok
                if kind == "N":
                    obj_row = obj_row or name
                else:
                    rows[name] = kind
            elif section == "COLUMNS":
                if len(tok) >= 3 and tok[1] == "'MARKER'":
                    in_int = tok[2] == "'INTORG'"
                    continue
                col = tok[0]
                if col not in col_index:
                    col_index[col] = len(cols)
                    cols.append(col)
                    integer.append(in_int)
                for r, v in zip(tok[1::2], tok[2::2]):
                    entries[(r, col)] = float(v)
            elif section == "RHS":
                for r, v in zip(tok[1::2], tok[2::2]):
                    rhs[r] = float(v)
            elif section == "BOUNDS":
                kind, col = tok[0], tok[2]
                val = float(tok[3]) if len(tok) > 3 else None
                lo, hi = bounds.get(col, (0.0, math.inf))
                if kind == "BV":
                    lo, hi = 0.0, 1.0
                elif kind == "FR":
                    lo, hi = -math.inf, math.inf
                elif kind == "MI":
                    lo = -math.inf
                elif kind == "LO":
                    lo = val
                elif kind == "UP":
                    hi = val
                elif kind == "FX":
                    lo = hi = val
                bounds[col] = (lo, hi)
    return rows, sense, obj_row, cols, col_index, integer, entries, rhs, bounds


def solve_scipy(model, solution, gap, time_limit):
    import numpy as np
    from scipy.optimize import Bounds, LinearConstraint, milp
    from scipy.sparse import lil_matrix

    rows, sense, obj_row, cols, col_index, integer, entries, rhs, bounds = read_mps(model)
    row_names = list(rows)
    row_index = {r: i for i, r in enumerate(row_names)}
    a = lil_matrix((len(row_names), len(cols)))
    c = np.zeros(len(cols))
    for (r, col), v in entries.items():
        if r == obj_row:
            c[col_index[col]] = v
        else:
            a[row_index[r], col_index[col]] = v
    lo = np.full(len(row_names), -np.inf)
    hi = np.full(len(row_names), np.inf)
    for r, kind in rows.items():
        b = rhs.get(r, 0.0)
        i = row_index[r]
        if kind in ("L", "E"):
            hi[i] = b
        if kind in ("G", "E"):
            lo[i] = b
    lb = np.array([bounds.get(col, (0.0, math.inf))[0] for col in cols])
    ub = np.array([bounds.get(col, (0.0, math.inf))[1] for col in cols])
    sign = -1.0 if sense.upper().startswith("MAX") else 1.0
    options = {"mip_rel_gap": gap, "disp": False}
    if math.isfinite(time_limit):
        options["time_limit"] = time_limit
    res = milp(
        sign * c,
        constraints=[LinearConstraint(a.tocsr(), lo, hi)] if row_names else [],
        integrality=np.array(integer, dtype=int),
        bounds=Bounds(lb, ub),
        options=options,
    )
    if res.status == 0:
        label = "optimal"
    elif res.status == 2:
        label = "infeasible"
    elif res.status == 1:
        label = "time-limit"
    else:
        sys.exit(f"scipy.optimize.milp failed: {res.message}")
    values = list(res.x) if res.x is not None else []
    objective = sign * res.fun if res.x is not None else None
    mip_gap = getattr(res, "mip_gap", None)
    write_solution(solution, label, objective, mip_gap, cols if values else [], values)


def main(argv):
    if len(argv) < 3:
        sys.exit(__doc__)
    model, solution = argv[1], argv[2]
    gap = float(argv[3]) if len(argv) > 3 else 1e-5
    time_limit = float(argv[4]) if len(argv) > 4 else math.inf
    try:
        import highspy  # noqa: F401
    except ImportError:
        solve_scipy(model, solution, gap, time_limit)
    else:
        solve_highspy(model, solution, gap, time_limit)


if __name__ == "__main__":
    main(sys.argv)
