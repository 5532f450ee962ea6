"""Truncated word series: products, exponentials and the stage exponents of each family."""

from embsplit.opalg import Family, Role, TruncatedSeries, series_exp, stage_series

# Two flows that do not commute: exp(aA) exp(bB) differs from exp(aA + bB) at grade 2.
N = 3
a, b = 0.5, 0.25
lhs = series_exp(TruncatedSeries.monomial(N, "A", a)) * series_exp(TruncatedSeries.monomial(N, "B", b))
rhs = series_exp(TruncatedSeries(N, {("A",): a, ("B",): b}))
print("exp(aA) exp(bB) - exp(aA + bB):")
print(" ", lhs - rhs)

# Stage exponents: a Strang stage carries only odd grades, a Lie-Trotter stage every grade.
print("\nS2 stage, alpha=0.3:", stage_series(Family.SS, Role.S2, 0.3, 5))
print("adjoint stage, alpha=0.3:", stage_series(Family.METHOD_ADJOINT, Role.ADJOINT_CHI, 0.3, 4))

# exp(x) exp(-x) is the identity up to the truncation order.
x = stage_series(Family.METHOD_ADJOINT, Role.BASIC_CHI, 0.7, 4)
print("\nexp(x) exp(-x) =", series_exp(x) * series_exp(-x))
