"""DIMACS CNF export (export-only format)."""

from __future__ import annotations

from ..cnf import CnfProblem


def export_dimacs(problem: CnfProblem) -> str:
    """Standard DIMACS with `c <index> <name>` comment lines for the variable map."""
    if problem.num_vars < 1:
        raise ValueError("DIMACS export requires at least one variable")
    names = problem.feature_of_var()
    lines = []
    for v in range(1, problem.num_vars + 1):
        lines.append(f"c {v} {names.get(v, f'aux${v}')}")
    lines.append(f"p cnf {problem.num_vars} {len(problem.clauses)}")
    for clause in problem.clauses:
        lines.append(" ".join(str(lit) for lit in clause) + " 0")
    return "\n".join(lines) + "\n"
