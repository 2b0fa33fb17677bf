from nabasin.solver.affine import AffineRecurrence, bounded_affine_orbit, tail_length
from nabasin.solver.conjugation import (
    CoefficientTable,
    ConjugationSolution,
    residual,
    residual_by_degree,
    residual_rows,
    solution_to_json,
    solve_conjugation,
)
from nabasin.solver.chart import ChartEstimate, basin_chart_estimate, chart_point

__all__ = [
    "AffineRecurrence",
    "ChartEstimate",
    "CoefficientTable",
    "ConjugationSolution",
    "basin_chart_estimate",
    "bounded_affine_orbit",
    "chart_point",
    "residual",
    "residual_by_degree",
    "residual_rows",
    "solution_to_json",
    "solve_conjugation",
    "tail_length",
]
