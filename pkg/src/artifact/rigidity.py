"""Weighted sequence spaces and the rigidity operator.

A 1-periodic f with Fourier data ``(a0, a1, b1, a2, b2, ...)`` is sent to
its low modes ``a0, a_k, b_k`` (k < qbar) followed by the pairs
``Lq(f)(3/(4q)), Lq(f)(0)`` for every q >= qbar.  In the weighted sup norms
``max(|a0|, sup_j j^gamma max(|a_j|, |b_j|))`` the distance of this map
from the identity is

    sup_q q^gamma [ sum_j j^-gamma max(|l1c - d| + |l1s|, |l2c| + |l2s - d|) + max(|g1|, |g2|) ]

with ``d = 1`` on the diagonal ``j = q``.  Rows are assembled from the exact
operator at the two sample points, columns beyond the stored block are
streamed exactly up to a cut-off, and the remainder is bounded with the
large sieve inequality.  Rows beyond the last computed q are handled by
fitting their approach to the universal limit ``zeta(gamma - 1) - 1``.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq
from scipy.special import zeta

from .errors import (IllConditionedWarning, InvalidArgument, NotContractive,
                     TailTooLargeWarning)
from .fourier import FourierSeries
from .operators import operator_jet

SV_CUTOFF = 1e-8


# -- norms --------------------------------------------------------------------

def _check_gamma(gamma):
    if not 2.0 < gamma < 3.0:
        raise InvalidArgument(f"gamma must lie in (2, 3), got {gamma}")


def xgamma_norm(f: FourierSeries, gamma: float) -> float:
    """``max(|a0|, sup_j j^gamma max(|a_j|, |b_j|))``."""
    _check_gamma(gamma)
    j = np.arange(1, f.order + 1, dtype=float)
    modes = (j ** gamma * np.maximum(np.abs(f.a), np.abs(f.b))).max(initial=0.0)
    return float(max(abs(f.a0), modes))


@dataclass(frozen=True)
class HGammaVector:
    c0: float
    c: np.ndarray
    d: np.ndarray

    @classmethod
    def from_interleaved(cls, vec) -> "HGammaVector":
        v = np.asarray(vec, dtype=float)
        return cls(float(v[0]), v[1::2].copy(), v[2::2].copy())

    def interleaved(self) -> np.ndarray:
        out = np.empty(2 * self.c.size + 1)
        out[0], out[1::2], out[2::2] = self.c0, self.c, self.d
        return out

    def norm(self, gamma: float) -> float:
        _check_gamma(gamma)
        j = np.arange(1, self.c.size + 1, dtype=float)
        modes = (j ** gamma * np.maximum(np.abs(self.c), np.abs(self.d))).max(initial=0.0)
        return float(max(abs(self.c0), modes))


# -- gamma0 -------------------------------------------------------------------

def gamma0(target: float = 0.9) -> float:
    """The exponent with ``sum_{k>=2} k^{1-gamma} = target``."""
    return float(brentq(lambda g: zeta(g - 1.0) - 1.0 - target, 2.5, 3.0, xtol=1e-14))


def diagonal_limit(gamma: float) -> float:
    """``sum_{k>=2} k^{1-gamma}``: the limit of the deviation rows as q grows."""
    return float(zeta(gamma - 1.0) - 1.0)


# -- bound budget -------------------------------------------------------------

@dataclass
class BudgetReport:
    gamma: float
    B: float
    exponents: list
    negative: list
    all_negative: bool
    window: tuple
    window_nonempty: bool
    feasible_B: tuple
    decay_factors: list | None = None

    def as_dict(self):
        return {"gamma": self.gamma, "B": self.B, "exponents": [float(e) for e in self.exponents],
                "negative": self.negative, "all_negative": self.all_negative,
                "window": [float(w) for w in self.window], "window_nonempty": self.window_nonempty,
                "feasible_B": [float(w) for w in self.feasible_B],
                "decay_factors": self.decay_factors}


def _exact(v):
    return v if isinstance(v, Fraction) else Fraction(str(v))


def bound_budget(gamma, B, qbar: int | None = None) -> BudgetReport:
    """Signs of the five exponents of q in the error terms of the norm estimate.

    Inputs are converted to exact fractions (via their decimal string) so
    signs are decided without rounding.  ``window`` is the interval
    ``((1-g)/(2-g) - 1, (7-g)/(4-g) - 1)`` for B; ``feasible_B`` intersects
    all five constraints.  With ``qbar`` the factors ``qbar^exponent`` are
    included.
    """
    g, b = _exact(gamma), _exact(B)
    ex = [(b + 1) * (2 - g) + g - 1,
          g - 3,
          (b + 1) * (3 - g) + g - 5,
          (b + 1) * (4 - g) + g - 7,
          b * (3 - g) - 1]
    neg = [e < 0 for e in ex]
    if g == 2 or g == 3:
        lo = hi = Fraction(0)
    else:
        lo = (1 - g) / (2 - g) - 1
        hi = (7 - g) / (4 - g) - 1
    feas_lo, feas_hi = lo, hi
    if 2 < g < 3:
        feas_hi = min(hi, (5 - g) / (3 - g) - 1, 1 / (3 - g))
    else:
        feas_lo, feas_hi = Fraction(1), Fraction(0)
    decay = None if qbar is None else [float(qbar) ** float(e) for e in ex]
    return BudgetReport(float(g), float(b), ex, neg, all(neg), (lo, hi), lo < hi,
                        (feas_lo, feas_hi), decay)


# -- rows of the operator -----------------------------------------------------

def _large_sieve_tail(jet, gamma, j_from):
    """Bound on ``sum_{j > j_from} j^-gamma (|Re E_j| + |Im E_j|)`` summed over
    the sample points, where ``E_j = sum_k e(j x_k) (i j a_k + b_k)``.

    Dyadic blocks ``(M, 2M]`` are handled by Cauchy-Schwarz and the
    Montgomery-Vaughan large sieve ``sum |sum_k c_k e(j x_k)|^2 <= (N - 1 + 1/delta) sum |c_k|^2``.
    """
    total = 0.0
    for x, a, b in zip(jet.x, jet.a, jet.b):
        xs = np.sort(np.mod(x, 1.0))
        delta = np.diff(np.append(xs, xs[0] + 1.0)).min()
        na, nb = np.linalg.norm(a), np.linalg.norm(b)
        m, acc = float(j_from), 0.0
        while True:
            # sum_{M < j <= 2M} j^s <= int_M^{2M} t^s dt for decreasing t^s
            s1 = (m ** (3 - 2 * gamma) - (2 * m) ** (3 - 2 * gamma)) / (2 * gamma - 3)
            s0 = (m ** (1 - 2 * gamma) - (2 * m) ** (1 - 2 * gamma)) / (2 * gamma - 1)
            term = np.sqrt(m - 1 + 1 / delta) * (np.sqrt(s1) * na + np.sqrt(s0) * nb)
            acc += term
            if term < 1e-18 * max(acc, 1e-300):
                break
            m *= 2
        total += np.sqrt(2.0) * acc
    return float(total)


@dataclass
class RowData:
    """One pair of rows ``(c_q, d_q)`` of the operator.

    ``entries`` has shape (2, 2J+1) in the column order ``a0, a1, b1, ...``;
    ``streamed`` is the exact weighted sum over ``J < j <= stream_J`` and
    ``sieve_tail`` bounds the remaining columns.
    """

    q: int
    entries: np.ndarray
    stored_sum: float
    streamed: float
    sieve_tail: float
    stream_J: int
    envelope_C: float

    @property
    def lower(self) -> float:
        return self.stored_sum + self.streamed

    @property
    def upper(self) -> float:
        return self.stored_sum + self.streamed + self.sieve_tail


def operator_rows(curve, chart, q: int, gamma: float, J: int, tail_target: float = 0.01,
                  max_stream: int = 1 << 22, min_stream: int = 1 << 12) -> RowData:
    """Assemble rows ``c_q, d_q`` and their weighted deviation from the identity."""
    jet = operator_jet(curve, chart, q, [3.0 / (4.0 * q), 0.0])
    j = np.arange(1, J + 1)
    resp = jet.mode_response(j)
    g = jet.constant_response()
    entries = np.empty((2, 2 * J + 1))
    entries[:, 0] = g
    entries[:, 1::2] = resp.real
    entries[:, 2::2] = resp.imag

    dev = entries.copy()
    if q <= J:
        dev[0, 2 * q - 1] -= 1.0
        dev[1, 2 * q] -= 1.0
    qg = float(q) ** gamma
    w = j.astype(float) ** -gamma
    per_col = np.maximum(np.abs(dev[0, 1::2]) + np.abs(dev[0, 2::2]),
                         np.abs(dev[1, 1::2]) + np.abs(dev[1, 2::2]))
    stored = qg * (float((w * per_col).sum()) + float(np.abs(g).max()))

    # smallest power-of-two cut-off whose sieve tail meets the target
    stream_J = max(min_stream, 1 << int(np.ceil(np.log2(J + 1))))
    while stream_J < max_stream and qg * _large_sieve_tail(jet, gamma, stream_J) > tail_target:
        stream_J *= 2
    streamed = 0.0
    if stream_J > J:
        for jj, e in jet.stream_modes(J + 1, stream_J + 1):
            m = np.maximum(np.abs(e[0].real) + np.abs(e[0].imag), np.abs(e[1].real) + np.abs(e[1].imag))
            if q > J:
                hit = jj == q
                m[hit] = np.maximum(np.abs(e[0].real[hit] - 1) + np.abs(e[0].imag[hit]),
                                    np.abs(e[1].real[hit]) + np.abs(e[1].imag[hit] - 1))
            streamed += float((jj.astype(float) ** -gamma * m).sum())
    sieve = qg * _large_sieve_tail(jet, gamma, stream_J)
    top = j > J // 2
    env = float((np.maximum(np.abs(resp[0]), np.abs(resp[1]))[top] * q / j[top]).max())
    return RowData(q, entries, stored, qg * streamed, sieve, stream_J, env)


# -- the assembled truncation -------------------------------------------------

@dataclass
class OperatorTruncation:
    """Rows ``c_0 .. d_Q`` against columns ``a_0 .. b_J``.

    ``tail_bound`` is the largest, over computed rows, contribution of the
    columns ``j > J`` (exactly streamed part plus large sieve bound);
    ``sieve_tails`` holds the non-computed part of each row's tail;
    ``naive_tail`` is the cruder ``C j / q`` envelope estimate for
    reference.
    """

    qbar: int
    gamma: float
    Q: int
    J: int
    matrix: np.ndarray
    tail_bound: float
    row_tails: dict
    row_stored: dict
    naive_tail: float
    envelope_C: float
    stream_J: dict
    sieve_tails: dict
    notes: list = field(default_factory=list)

    def row_index(self, q: int, kind: str) -> int:
        if q == 0:
            return 0
        return 2 * q - 1 if kind == "c" else 2 * q

    def identity(self) -> np.ndarray:
        eye = np.zeros_like(self.matrix)
        n = min(eye.shape)
        eye[np.arange(n), np.arange(n)] = 1.0
        return eye

    def apply(self, f: FourierSeries) -> HGammaVector:
        v = np.zeros(2 * self.J + 1)
        c = f.coefficients()[:v.size]
        v[:c.size] = c
        return HGammaVector.from_interleaved(self.matrix @ v)

    def to_text(self, path) -> None:
        header = f"qbar={self.qbar} gamma={self.gamma!r} Q={self.Q} J={self.J} rows={self.matrix.shape[0]} cols={self.matrix.shape[1]}"
        np.savetxt(path, self.matrix, fmt="%.17g", header=header)


def assemble_operator(curve, chart, qbar: int, gamma: float, Q: int | None = None,
                      J: int | None = None, tail_target: float = 0.01,
                      max_stream: int = 1 << 22, workers: int = 1) -> OperatorTruncation:
    """Truncated matrix of the rigidity operator with tail bookkeeping.

    Rows for distinct q are independent and are assembled on ``workers``
    threads.
    """
    _check_gamma(gamma)
    Q = 4 * qbar if Q is None else Q
    J = 8 * qbar if J is None else J
    if qbar < 3 or Q < qbar or J < Q:
        raise InvalidArgument("need qbar >= 3, Q >= qbar and J >= Q")
    m = np.zeros((2 * Q + 1, 2 * J + 1))
    # identity rows for the low modes are written, not computed
    m[0, 0] = 1.0
    for k in range(1, qbar):
        m[2 * k - 1, 2 * k - 1] = 1.0
        m[2 * k, 2 * k] = 1.0
    tails, stored, streams, sieve = {}, {}, {}, {}
    env = 0.0
    qs = list(range(qbar, Q + 1))
    task = lambda q: operator_rows(curve, chart, q, gamma, J, tail_target, max_stream)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(task, qs))
    else:
        rows = [task(q) for q in qs]
    for q, row in zip(qs, rows):
        m[2 * q - 1] = row.entries[0]
        m[2 * q] = row.entries[1]
        tails[q] = row.streamed + row.sieve_tail
        stored[q] = row.stored_sum
        streams[q] = row.stream_J
        sieve[q] = row.sieve_tail
        env = max(env, row.envelope_C)
    tail = max(tails.values())
    # C j / q envelope summed against j^-gamma beyond J, in the q^gamma weighted row
    naive = max(q ** (gamma - 1.0) * env * float(zeta(gamma - 1.0, J + 1)) for q in tails)
    notes = []
    worst = max(sieve.values())
    if worst > tail_target:
        msg = f"large sieve tail {worst:.3g} exceeds the target {tail_target:.3g}"
        warnings.warn(msg, TailTooLargeWarning, stacklevel=2)
        notes.append(msg)
    return OperatorTruncation(qbar, gamma, Q, J, m, tail, tails, stored, naive, env, streams, sieve, notes)


@dataclass
class NormReport:
    """Estimate of ``||I^qbar - identity||_gamma``.

    ``value`` is the sup over computed rows (stored columns, exact streamed
    columns and the sieve tail).  ``extrapolated`` bounds rows ``q > Q`` from
    a fit ``limit + C q^-sigma``; ``bound`` combines both.
    """

    value: float
    argmax_q: int | None
    rows: dict
    matrix_part: float
    tail_bound: float
    limit: float
    sigma: float
    extrapolated: float | None
    bound: float

    def as_dict(self):
        return {"value": self.value, "argmax_q": self.argmax_q,
                "rows": {str(k): v for k, v in self.rows.items()},
                "matrix_part": self.matrix_part, "tail_bound": self.tail_bound,
                "limit": self.limit, "sigma": self.sigma,
                "extrapolated": self.extrapolated, "bound": self.bound}


def _row_sums(matrix, qbar, Q, J, gamma):
    dev = matrix - _identity_like(matrix)
    j = np.arange(1, J + 1, dtype=float) ** -gamma
    out = {}
    for q in range(qbar, Q + 1):
        c, d = dev[2 * q - 1], dev[2 * q]
        per = np.maximum(np.abs(c[1::2]) + np.abs(c[2::2]), np.abs(d[1::2]) + np.abs(d[2::2]))
        out[q] = q ** gamma * (float((j * per).sum()) + max(abs(c[0]), abs(d[0])))
    return out


def _identity_like(m):
    eye = np.zeros_like(m)
    n = min(m.shape)
    eye[np.arange(n), np.arange(n)] = 1.0
    return eye


def extrapolate_rows(rows: dict, limit: float):
    """Fit ``rows[q] - limit = C q^-sigma``; return ``(sigma, bound for q > max q)``."""
    qs = np.array(sorted(rows))
    excess = np.array([rows[q] - limit for q in qs])
    keep = excess > 0
    if keep.sum() < 3:
        return float("nan"), None
    sig, logc = np.polyfit(np.log(qs[keep]), np.log(excess[keep]), 1)
    sigma = -float(sig)
    if sigma <= 0:
        return sigma, float("inf")
    return sigma, float(limit + np.exp(logc) * (qs.max() + 1.0) ** -sigma)


def norm_deviation(trunc: OperatorTruncation, extrapolate: bool = True) -> NormReport:
    """Weighted row-sum norm of ``matrix - identity`` plus the column tails."""
    rows_m = _row_sums(trunc.matrix, trunc.qbar, trunc.Q, trunc.J, trunc.gamma)
    rows = {q: rows_m[q] + trunc.row_tails.get(q, 0.0) for q in rows_m}
    if rows:
        qmax = max(rows, key=rows.get)
        value = rows[qmax]
    else:
        qmax, value = None, 0.0
    limit = diagonal_limit(trunc.gamma)
    sigma, extra = extrapolate_rows(rows, limit) if extrapolate else (float("nan"), None)
    bound = value if extra is None else max(value, extra)
    return NormReport(value, qmax, rows, max(rows_m.values(), default=0.0), trunc.tail_bound,
                      limit, sigma, extra, bound)


@dataclass
class ContractionSearch:
    """Outcome of looking for a qbar with ``||I^qbar - identity|| < threshold``.

    When a computed row's exact partial sum already reaches the threshold,
    every qbar up to that row is ruled out (the norm is a sup over rows
    ``q >= qbar``); ``blocking_row`` records it.
    """

    threshold: float
    qbar: int | None
    report: NormReport | None
    blocking_row: int | None
    blocking_lower: float | None
    rows: dict

    @property
    def found(self) -> bool:
        return self.qbar is not None


def contraction_search(curve, chart, gamma: float, qbar_max: int, threshold: float = 0.95,
                       q_factor: int = 4, j_factor: int = 8, tail_target: float = 0.01,
                       max_stream: int = 1 << 22) -> ContractionSearch:
    """Find the smallest qbar <= qbar_max whose certified norm is below threshold.

    Rows are computed from ``qbar_max`` upward first; if one of them has an
    exact partial sum at or above ``threshold`` no qbar <= qbar_max can
    succeed and the search stops.  Otherwise qbar is decreased while the
    certificate holds.
    """
    _check_gamma(gamma)
    rows: dict = {}

    def row(q, J):
        if q not in rows:
            rows[q] = operator_rows(curve, chart, q, gamma, J, tail_target, max_stream)
        return rows[q]

    def certify(qbar):
        Q, J = q_factor * qbar, j_factor * qbar
        for q in range(qbar, Q + 1):
            r = row(q, J)
            if r.lower >= threshold:
                return None, q, r.lower
        vals = {q: rows[q].upper for q in range(qbar, Q + 1)}
        limit = diagonal_limit(gamma)
        sigma, extra = extrapolate_rows(vals, limit)
        qmax = max(vals, key=vals.get)
        bound = vals[qmax] if extra is None else max(vals[qmax], extra)
        rep = NormReport(vals[qmax], qmax, vals, max(rows[q].stored_sum for q in vals),
                         max(rows[q].upper - rows[q].stored_sum for q in vals),
                         limit, sigma, extra, bound)
        return rep, None, None

    rep, block_q, block_v = certify(qbar_max)
    if rep is None or rep.bound >= threshold:
        return ContractionSearch(threshold, None, rep, block_q, block_v,
                                 {q: (r.lower, r.upper) for q, r in rows.items()})
    best, best_rep = qbar_max, rep
    for qbar in range(qbar_max - 1, 2, -1):
        rep, _, _ = certify(qbar)
        if rep is None or rep.bound >= threshold:
            break
        best, best_rep = qbar, rep
    return ContractionSearch(threshold, best, best_rep, None, None,
                             {q: (r.lower, r.upper) for q, r in rows.items()})


# -- deformation space --------------------------------------------------------

@dataclass
class DeformationSpace:
    """Functions whose rows ``q >= qbar`` vanish.

    ``basis_nu0`` are orthonormal coefficient vectors (as series in the
    Lazutkin variable), ``basis_n`` the same functions divided by ``mu``.
    """

    basis_nu0: list
    basis_n: list
    dimension: int
    singular_values: np.ndarray
    expected_dimension: int
    norm: NormReport
    residual: float

    def contains(self, f: FourierSeries) -> float:
        """Relative distance of f's coefficients from the span of the basis."""
        n = 2 * self.basis_nu0[0].order + 1 if self.basis_nu0 else 1
        v = np.zeros(n)
        c = f.coefficients()[:n]
        v[:c.size] = c
        if not self.basis_nu0:
            return 1.0
        b = np.array([_padded(s, n) for s in self.basis_nu0])
        proj = b.T @ (b @ v)
        return float(np.linalg.norm(v - proj) / max(np.linalg.norm(v), 1e-300))


def _padded(s: FourierSeries, n):
    v = np.zeros(n)
    c = s.coefficients()[:n]
    v[:c.size] = c
    return v


def annihilation_residual(trunc: OperatorTruncation, f: FourierSeries) -> float:
    """Largest entry of the rows ``q >= qbar`` applied to f."""
    out = trunc.apply(f).interleaved()
    return float(np.abs(out[2 * trunc.qbar - 1:]).max(initial=0.0))


def deformation_space(curve, chart, qbar: int, gamma: float, Q: int | None = None,
                      J: int | None = None, trunc: OperatorTruncation | None = None,
                      cutoff: float = SV_CUTOFF, require_contraction: bool = True) -> DeformationSpace:
    """Null space of the rows ``q = qbar..Q`` restricted to modes ``j <= Q``."""
    if trunc is None:
        trunc = assemble_operator(curve, chart, qbar, gamma, Q, J)
    report = norm_deviation(trunc)
    if require_contraction and report.bound >= 1.0:
        raise NotContractive(f"||I - identity|| estimate {report.bound:.4f} is not below 1")
    Q = trunc.Q
    a = trunc.matrix[2 * trunc.qbar - 1:, :2 * Q + 1]
    _, s, vt = np.linalg.svd(a)
    smax = s.max(initial=0.0)
    rank = int((s > cutoff * smax).sum())
    near = (s > 0.1 * cutoff * smax) & (s < 10.0 * cutoff * smax)
    if np.any(near):
        warnings.warn("singular values close to the rank cut-off", IllConditionedWarning, stacklevel=2)
    null = vt[rank:]
    basis = [FourierSeries.from_coefficients(v) for v in null]
    basis_n = [FourierSeries.from_function(lambda x, b=b: b(x) / chart.mu(x)) for b in basis]
    res = max((annihilation_residual(trunc, b) for b in basis), default=0.0)
    return DeformationSpace(basis, basis_n, len(basis), s, 2 * trunc.qbar - 1, report, res)


def write_basis_csv(path, space: DeformationSpace) -> None:
    from .geometry import write_table

    if not space.basis_nu0:
        write_table(path, ["index", "a0"], np.zeros((0, 2)))
        return
    n = max(b.order for b in space.basis_nu0)
    header = ["index", "a0"] + [f"{k}{j}" for j in range(1, n + 1) for k in ("a", "b")]
    rows = [np.concatenate(([i], _padded(b, 2 * n + 1))) for i, b in enumerate(space.basis_nu0)]
    write_table(path, header, np.array(rows))
