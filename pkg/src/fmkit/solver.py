"""Complete backtracking SAT solver with unit propagation and assumption literals.

Literals are nonzero signed integers (DIMACS convention). The solver is
reusable across queries: assumptions are handled per call without re-encoding,
and clauses may be added between calls (used for blocking-clause enumeration).
"""

from __future__ import annotations

from typing import Iterable, Sequence


class SatSolver:
    def __init__(self, num_vars: int, clauses: Iterable[Sequence[int]]):
        self.num_vars = num_vars
        self.clauses: list[list[int]] = []
        self.units: list[int] = []
        self.has_empty = False
        # watch lists indexed by literal offset: lit -> lit + num_vars
        self.watches: list[list[int]] = [[] for _ in range(2 * num_vars + 1)]
        self.assign = [0] * (num_vars + 1)  # 0 unassigned, 1 true, -1 false
        self.trail: list[int] = []
        self.qhead = 0
        for clause in clauses:
            self.add_clause(clause)

    def add_clause(self, clause: Sequence[int]) -> None:
        lits = sorted(set(clause), key=abs)
        for lit in lits:
            if abs(lit) < 1 or abs(lit) > self.num_vars:
                raise ValueError(f"literal {lit} out of range 1..{self.num_vars}")
        if any(-lit in lits for lit in lits):
            return  # tautology
        if not lits:
            self.has_empty = True
            return
        if len(lits) == 1:
            self.units.append(lits[0])
            return
        idx = len(self.clauses)
        self.clauses.append(lits)
        n = self.num_vars
        self.watches[lits[0] + n].append(idx)
        self.watches[lits[1] + n].append(idx)

    # -- assignment bookkeeping ---------------------------------------------

    def _value(self, lit: int) -> int:
        """1 if lit true, -1 if false, 0 if unassigned."""
        a = self.assign[lit if lit > 0 else -lit]
        if a == 0:
            return 0
        return a if lit > 0 else -a

    def _enqueue(self, lit: int) -> bool:
        v = self._value(lit)
        if v == 1:
            return True
        if v == -1:
            return False
        self.assign[abs(lit)] = 1 if lit > 0 else -1
        self.trail.append(lit)
        return True

    def _undo_to(self, length: int) -> None:
        while len(self.trail) > length:
            lit = self.trail.pop()
            self.assign[abs(lit)] = 0
        self.qhead = length

    def _propagate(self) -> bool:
        """Unit propagation; returns False on conflict."""
        n = self.num_vars
        watches = self.watches
        clauses = self.clauses
        assign = self.assign
        while self.qhead < len(self.trail):
            lit = self.trail[self.qhead]
            self.qhead += 1
            false_lit = -lit
            ws = watches[false_lit + n]
            keep: list[int] = []
            i = 0
            num = len(ws)
            while i < num:
                ci = ws[i]
                i += 1
                clause = clauses[ci]
                # ensure the other watched literal sits at position 0
                if clause[0] == false_lit:
                    clause[0], clause[1] = clause[1], clause[0]
                first = clause[0]
                a = assign[first if first > 0 else -first]
                if a != 0 and (a > 0) == (first > 0):
                    keep.append(ci)  # clause already satisfied
                    continue
                moved = False
                for k in range(2, len(clause)):
                    other = clause[k]
                    a = assign[other if other > 0 else -other]
                    if a == 0 or (a > 0) == (other > 0):
                        clause[1], clause[k] = clause[k], clause[1]
                        watches[other + n].append(ci)
                        moved = True
                        break
                if moved:
                    continue
                keep.append(ci)
                if not self._enqueue(first):
                    keep.extend(ws[i:])
                    watches[false_lit + n] = keep
                    return False
            watches[false_lit + n] = keep
        return True

    # -- solving --------------------------------------------------------------

    def solve(self, assumptions: Sequence[int] = ()) -> dict[int, bool] | None:
        """Satisfying total assignment extending the assumptions, or None."""
        if self.has_empty:
            return None
        try:
            for u in self.units:
                if not self._enqueue(u):
                    return None
            if not self._propagate():
                return None
            for a in assumptions:
                v = self._value(a)
                if v == -1:
                    return None
                if v == 0:
                    self._enqueue(a)
                    if not self._propagate():
                        return None

            decisions: list[tuple[int, int, bool]] = []  # (trail length, var, tried both)
            next_var = 1
            while True:
                var = 0
                for x in range(next_var, self.num_vars + 1):
                    if self.assign[x] == 0:
                        var = x
                        break
                if var == 0:
                    return {x: self.assign[x] > 0 for x in range(1, self.num_vars + 1)}
                next_var = var
                decisions.append((len(self.trail), var, False))
                self._enqueue(var)
                while not self._propagate():
                    while decisions and decisions[-1][2]:
                        tl, _, _ = decisions.pop()
                        self._undo_to(tl)
                    if not decisions:
                        return None
                    tl, dvar, _ = decisions.pop()
                    self._undo_to(tl)
                    decisions.append((tl, dvar, True))
                    self._enqueue(-dvar)
                    next_var = 1
        finally:
            self._undo_to(0)


def check_assignment(clauses: Iterable[Sequence[int]], assignment: dict[int, bool]) -> bool:
    """True iff the assignment satisfies every clause."""
    return all(
        any(assignment[abs(lit)] == (lit > 0) for lit in clause) for clause in clauses
    )
