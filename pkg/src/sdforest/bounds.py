"""Numeric evaluation of the generalization bounds that motivate the
semi-parametric design: a decision-tree bound, a ReLU-network VC lower
bound, a max-margin Rademacher bound, and a task-diversity bound.

Natural logarithms throughout.  Asymptotic constants default to 1 and are
exposed as parameters: these calculators are comparative tools, not
certified numbers.
"""

import math


def _check(name, value, *, positive=False, nonneg=False):
    if positive and not value > 0:
        raise ValueError(f"{name} must be > 0, got {value}")
    if nonneg and value < 0:
        raise ValueError(f"{name} must be >= 0, got {value}")


def _check_delta(delta):
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")


def tree_generalization_gap_terms(q, j, m, delta) -> dict:
    _check("Q", q, nonneg=True)
    _check("J", j, nonneg=True)
    _check("m", m, positive=True)
    _check_delta(delta)
    return {
        "structure (Q+1)ln(J+3)": (q + 1) * math.log(j + 3),
        "confidence ln(2/delta)": math.log(2.0 / delta),
        "denominator 2m": 2.0 * m,
    }


def tree_generalization_gap(q, j, m, delta) -> float:
    """sqrt(((Q+1) ln(J+3) + ln(2/delta)) / (2m)): the generalization gap of
    a Q-node decision tree with axis-threshold splits over J features."""
    t = tree_generalization_gap_terms(q, j, m, delta)
    return math.sqrt((t["structure (Q+1)ln(J+3)"] + t["confidence ln(2/delta)"])
                     / t["denominator 2m"])


def relu_vc_lower_bound_terms(w, u, const=1.0) -> dict:
    _check("W", w, positive=True)
    _check("U", u, positive=True)
    if w <= u:
        raise ValueError(f"need W > U, got W={w}, U={u}")
    _check("const", const, positive=True)
    return {"W*U": w * u, "ln(W/U)": math.log(w / u), "const": const}


def relu_vc_lower_bound(w, u, const=1.0) -> float:
    """const * W * U * ln(W/U): VC-dimension lower bound of a ReLU network
    with W weights and U layers (asymptotic constant exposed)."""
    t = relu_vc_lower_bound_terms(w, u, const)
    return t["const"] * t["W*U"] * t["ln(W/U)"]


def maxmargin_bound_terms(log_z, m, b, c, r_m, delta) -> dict:
    _check("m", m, positive=True)
    _check("C", c, nonneg=True)
    _check("R_m", r_m, nonneg=True)
    _check_delta(delta)
    if b <= math.e / 4.0:
        raise ValueError(f"B must exceed e/4 so that ln ln(4B) > 0, got B={b}")
    return {
        "normalizer logZ/m": log_z / m,
        "complexity 8*B*C*R_m": 8.0 * b * c * r_m,
        "weight-scale sqrt(lnln(4B))/sqrt(m)": math.sqrt(math.log(math.log(4.0 * b))) / math.sqrt(m),
        "confidence sqrt(ln(2/delta))/sqrt(2m)": math.sqrt(math.log(2.0 / delta)) / math.sqrt(2.0 * m),
    }


def maxmargin_bound(log_z, m, b, c, r_m, delta) -> float:
    """Four-term max-margin bound: logZ/m + 8*B*C*R_m + sqrt(lnln(4B))/sqrt(m)
    + sqrt(ln(2/delta))/sqrt(2m)."""
    return sum(maxmargin_bound_terms(log_z, m, b, c, r_m, delta).values())


def diversity_bound_terms(train_err, lips, nu, k, m, c, d, g_f, delta, const=1.0) -> dict:
    _check("nu", nu, positive=True)
    if k < 1:
        raise ValueError(f"K must be >= 1, got {k}")
    _check("m", m, positive=True)
    _check("C", c, nonneg=True)
    _check("D", d, nonneg=True)
    _check("G_F", g_f, nonneg=True)
    _check_delta(delta)
    _check("const", const, positive=True)
    return {
        "training error": train_err,
        "task spread L^2 ln(K)/nu": const * lips * lips * math.log(k) / nu,
        "complexity L*G_F": const * lips * g_f,
        "per-task confidence (C/nu)sqrt(ln(2/delta)/K)": const * (c / nu) * math.sqrt(math.log(2.0 / delta) / k),
        "per-pixel confidence sqrt(ln(2/delta)/m)": const * math.sqrt(math.log(2.0 / delta) / m),
        "residual L*D/(nu*K^2)": const * lips * d / (nu * k * k),
    }


def diversity_bound(train_err, lips, nu, k, m, c, d, g_f, delta, const=1.0) -> float:
    """Generalization of a per-video instant-learned model under a
    (nu, eps)-diversity condition across K tasks (asymptotic constant
    exposed; applied to every term except the training error)."""
    return sum(diversity_bound_terms(train_err, lips, nu, k, m, c, d, g_f, delta, const).values())
