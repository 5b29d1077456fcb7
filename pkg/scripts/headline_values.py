"""Recompute the headline rates, variances and optima in one table.

    python3 scripts/headline_values.py [--out DIR]
"""

import argparse
from pathlib import Path

import numpy as np

from scanopt import (
    BivariateGaussianSpec,
    GaussianTarget,
    assemble_scan_matrix,
    bivariate_avar_sum,
    bivariate_rate_closed_form,
    build_binomial_model,
    discrete_scan_rate,
    equal_alpha,
    exchangeable_sigma,
    function_on_states,
    gaussian_scan_rate,
    optimize_1d,
    optimize_simplex,
    peskun_avar,
    relative_gain,
)
from scanopt.io import fmt, write_table


def rows():
    yield ["bivariate rate argmin (rho=0.5)", optimize_1d(lambda a: bivariate_rate_closed_form(0.5, a)).alpha1]
    biv = BivariateGaussianSpec(2.0, 1.0, 0.5)
    yield ["bivariate avar-sum argmin (2,1,0.5)", optimize_1d(lambda a: bivariate_avar_sum(biv, a)).alpha1]

    t = GaussianTarget.from_sigma(exchangeable_sigma([10.0, 1.0, 1.0]))
    res = optimize_simplex(lambda a: gaussian_scan_rate(t, a), 3)
    eq = gaussian_scan_rate(t, equal_alpha(3))
    yield ["trivariate rate argmin (10,1,1)", res.alpha_star]
    yield ["trivariate rate at optimum / equal alpha", [res.value, eq]]
    yield ["trivariate relative gain", relative_gain(res.value, eq)]

    for n1, n2, p in [(3, 2, 0.5), (6, 3, 0.5), (5, 5, 0.3)]:
        m = build_binomial_model(n1, n2, p)
        yield [f"discrete rate argmin ({n1},{n2},{p:g})",
               optimize_1d(lambda a: discrete_scan_rate(assemble_scan_matrix(m, a))).alpha1]
    m = build_binomial_model(6, 3, 0.5)
    for spec in ("sum", "coord:x", "coord:theta"):
        h = function_on_states(m, spec)
        yield [f"discrete avar argmin (6,3,0.5) h={spec}",
               optimize_1d(lambda a: peskun_avar(assemble_scan_matrix(m, a), h)).alpha1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    table = list(rows())
    write_table(out / "headline_values.csv", {"script": "headline_values"}, ["quantity", "value"], table)
    width = max(len(r[0]) for r in table)
    for name, value in table:
        print(f"{name:<{width}}  {fmt(np.round(value, 6))}")


if __name__ == "__main__":
    main()
