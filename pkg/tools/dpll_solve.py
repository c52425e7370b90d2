#!/usr/bin/env python3
"""A minimal DIMACS CNF solver with the standard s/v output protocol.

Usage: dpll_solve.py FILE.cnf

Prints ``s SATISFIABLE`` plus ``v`` model lines (exit 10) or
``s UNSATISFIABLE`` (exit 20).  DPLL with unit propagation and
chronological backtracking; static most-occurrences decision order.
Intended as a stand-in external solver for desk-scale formulas; any real
solver (minisat, cadical, glucose, ...) speaks the same protocol and can
be used instead.
"""

import sys
from collections import deque


def parse_dimacs(path):
    num_vars = 0
    clauses = []
    with open(path, encoding="utf-8") as handle:
        for raw in handle:
            line = raw.strip()
            if not line or line.startswith("c"):
                continue
            if line.startswith("p"):
                parts = line.split()
                num_vars = int(parts[2])
                continue
            lits = [int(x) for x in line.split()]
            if lits and lits[-1] == 0:
                lits.pop()
            if lits:
                clauses.append(lits)
            else:
                clauses.append([])  # empty clause: trivially unsatisfiable
    return num_vars, clauses


def solve(num_vars, clauses):
    """Return a model as a list of signed literals, or None if unsatisfiable."""
    occ_pos = [[] for _ in range(num_vars + 1)]
    occ_neg = [[] for _ in range(num_vars + 1)]
    for ci, clause in enumerate(clauses):
        if not clause:
            return None
        for lit in clause:
            (occ_pos if lit > 0 else occ_neg)[abs(lit)].append(ci)

    sat_count = [0] * len(clauses)
    free_count = [len(c) for c in clauses]
    value = [None] * (num_vars + 1)
    trail = []  # (var, is_decision, flipped)
    queue = deque()

    order = sorted(range(1, num_vars + 1),
                   key=lambda v: -(len(occ_pos[v]) + len(occ_neg[v])))

    def on_assign(var, val):
        # returns a conflicting clause index or None
        value[var] = val
        sats = occ_pos[var] if val else occ_neg[var]
        unsats = occ_neg[var] if val else occ_pos[var]
        for ci in sats:
            sat_count[ci] += 1
        conflict = None
        for ci in unsats:
            free_count[ci] -= 1
            if sat_count[ci] == 0:
                if free_count[ci] == 0:
                    conflict = ci
                elif free_count[ci] == 1:
                    queue.append(ci)
        return conflict

    def undo(var):
        val = value[var]
        value[var] = None
        sats = occ_pos[var] if val else occ_neg[var]
        unsats = occ_neg[var] if val else occ_pos[var]
        for ci in sats:
            sat_count[ci] -= 1
        for ci in unsats:
            free_count[ci] += 1

    def propagate():
        while queue:
            ci = queue.popleft()
            if sat_count[ci] > 0 or free_count[ci] != 1:
                continue
            lit = next(l for l in clauses[ci] if value[abs(l)] is None)
            trail.append((abs(lit), False, False))
            conflict = on_assign(abs(lit), lit > 0)
            if conflict is not None:
                return conflict
        return None

    for ci, clause in enumerate(clauses):
        if len(clause) == 1:
            queue.append(ci)

    next_order_pos = 0
    conflict = propagate()
    while True:
        if conflict is not None:
            queue.clear()
            flipped_a_decision = False
            while trail:
                var, is_decision, flipped = trail.pop()
                undo(var)
                if is_decision and not flipped:
                    # retry this decision with the other value
                    trail.append((var, True, True))
                    conflict = on_assign(var, False)
                    next_order_pos = 0
                    flipped_a_decision = True
                    break
            if not flipped_a_decision:
                return None
            if conflict is None:
                conflict = propagate()
            continue
        while next_order_pos < len(order) and value[order[next_order_pos]] is not None:
            next_order_pos += 1
        if next_order_pos == len(order):
            return [v if value[v] else -v for v in range(1, num_vars + 1)]
        var = order[next_order_pos]
        trail.append((var, True, False))
        conflict = on_assign(var, True)
        if conflict is None:
            conflict = propagate()


def main():
    if len(sys.argv) != 2:
        print("usage: dpll_solve.py FILE.cnf", file=sys.stderr)
        return 1
    num_vars, clauses = parse_dimacs(sys.argv[1])
    model = solve(num_vars, clauses)
    if model is None:
        print("s UNSATISFIABLE")
        return 20
    print("s SATISFIABLE")
    line = ["v"]
    for lit in model:
        line.append(str(lit))
        if len(line) >= 20:
            print(" ".join(line))
            line = ["v"]
    line.append("0")
    print(" ".join(line))
    return 10


if __name__ == "__main__":
    sys.exit(main())
