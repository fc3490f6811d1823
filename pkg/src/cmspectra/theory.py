"""Closed-form predictions for the two degree-constrained ensembles.

The headline pair: the expected largest adjacency eigenvalue is
``m2/m1 + m1 m3 / m2^2`` under soft (on-average) degree constraints and
exactly 1 less under hard (exact) constraints, independently of the degree
scale. Also provides the limiting spectral densities used as references by
the histogram experiments, and the exact/asymptotic expectations of the
centered quadratic forms that drive the eigenvalue expansion.

Every value is tagged exact vs asymptotic: exact values must match full
enumeration on tiny instances, asymptotic ones carry finite-size error by
design (the wedge expectation uses leading-order pairing probabilities).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .degrees import DegreeSequence
from .errors import DegenerateSequenceError, InvalidDegreeError


@dataclass(frozen=True)
class Prediction:
    name: str
    value: float
    kind: str           # "exact" | "asymptotic"
    provenance: str     # formula / derivation note

    def to_json_record(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "kind": self.kind,
            "citation": self.provenance,
        }


def lambda1_microcanonical(seq: DegreeSequence) -> Prediction:
    """Leading-order E[lambda_1] when the degrees are fixed exactly."""
    m1, m2, m3 = seq.m1, seq.m2, seq.m3
    value = m2 / m1 + m1 * m3 / m2 ** 2 - 1.0
    return Prediction(
        "lambda1_microcanonical", value, "asymptotic",
        "m2/m1 + m1*m3/m2^2 - 1, hard-constraint ensemble, o(1) error",
    )


def lambda1_canonical(seq: DegreeSequence) -> Prediction:
    """Leading-order E[lambda_1] when only average degrees are fixed."""
    m1, m2, m3 = seq.m1, seq.m2, seq.m3
    value = m2 / m1 + m1 * m3 / m2 ** 2
    return Prediction(
        "lambda1_canonical", value, "asymptotic",
        "m2/m1 + m1*m3/m2^2, soft-constraint ensemble, o(1) error",
    )


def kesten_mckay_pdf(d: int, x) -> float | np.ndarray:
    """Limiting spectral density of random d-regular graphs (fixed d >= 2)."""
    if d < 2:
        raise InvalidDegreeError(f"Kesten-McKay law needs d >= 2, got {d}")
    x = np.asarray(x, dtype=np.float64)
    edge2 = 4.0 * (d - 1)
    inside = x * x < edge2
    val = np.zeros_like(x)
    xs = x[inside]
    val[inside] = d * np.sqrt(edge2 - xs * xs) / (2.0 * np.pi * (d * d - xs * xs))
    return float(val) if val.ndim == 0 else val


def semicircle_pdf(x) -> float | np.ndarray:
    """Semicircle density with radius 2 (unit variance), matching the
    adjacency rescaled by 1/sqrt(average degree) for regular graphs."""
    x = np.asarray(x, dtype=np.float64)
    val = np.zeros_like(x)
    inside = x * x < 4.0
    xs = x[inside]
    val[inside] = np.sqrt(4.0 - xs * xs) / (2.0 * np.pi)
    return float(val) if val.ndim == 0 else val


def alon_boppana_bound(d: int) -> float:
    """Asymptotic floor 2 sqrt(d-1) for the second eigenvalue of d-regular
    graphs; exposed as a reference line."""
    if d < 2:
        raise InvalidDegreeError(f"bound defined for d >= 2, got {d}")
    return 2.0 * math.sqrt(d - 1.0)


def expected_h_quadratic_k1(seq: DegreeSequence) -> Prediction:
    """Exact expectation of <e, (A - e e^T) e> under the matching law."""
    value = -seq.m3 / (seq.m1 - 1) ** 2
    return Prediction(
        "h_quadratic_k1", value, "exact",
        "-m3/(m1-1)^2; loops are the only surviving contribution",
    )


def expected_wedge_sum(seq: DegreeSequence) -> Prediction:
    """Leading-order expected degree-weighted wedge count.

    Sum over ordered vertex pairs (i, j), i != j, of d_i d_j times the number
    of common neighbours, evaluated with leading-order pairing probabilities;
    exact enumeration differs at small m1 (the formula drops lower-order
    pairing corrections).
    """
    if seq.m1 < 3:
        raise DegenerateSequenceError(f"wedge expectation needs m1 >= 3, got {seq.m1}")
    m1, m2, m3, m4, m5 = seq.m1, seq.m2, seq.m3, seq.m4, seq.m5
    num = (m2 ** 3 - m2 * m4 - m1 * m2 ** 2 + m1 * m4
           - 4 * m3 * m2 + 4 * m5 + 4 * m2 ** 2 - 4 * m4)
    value = num / ((m1 - 1) * (m1 - 2))
    return Prediction(
        "wedge_sum", value, "asymptotic",
        "(m2^3 - m2 m4 - m1 m2^2 + m1 m4 - 4 m3 m2 + 4 m5 + 4 m2^2 - 4 m4)"
        " / ((m1-1)(m1-2))",
    )


def expected_h_quadratic_k2(seq: DegreeSequence) -> Prediction:
    """Leading-order expectation of <e, (A - E[A])^2 e>."""
    wedge = expected_wedge_sum(seq).value
    m1, m2, m3 = seq.m1, seq.m2, seq.m3
    value = (m3 + wedge - m2 ** 3 / (m1 - 1) ** 2) / (m1 - 1)
    return Prediction(
        "h_quadratic_k2", value, "asymptotic",
        "(m3 + wedge_sum - m2^3/(m1-1)^2) / (m1-1)",
    )


def normalized_h2_leading(seq: DegreeSequence) -> Prediction:
    """Large-n limit of E[<e, H^2 e>] / (m2/(m1-1))^2."""
    value = seq.m1 * seq.m3 / seq.m2 ** 2 - 1.0
    return Prediction(
        "normalized_h2_leading", value, "asymptotic",
        "m1*m3/m2^2 - 1; vanishes exactly for regular sequences",
    )
