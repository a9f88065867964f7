"""Multiplicative coefficient systems attached to a class-group character.

r(n) tables are generated by summing character-weighted lattice counts of the
reduced forms:

    r_psi(n) = (1/w) * sum_A psi(A) * #{(x, y) : Q_A(x, y) = n},

which keeps the construction independent of how prime ideals split; the Hecke
multiplicativity / p-power recursion check then certifies the table.  On top
of r(n) the module builds the square-root-inverse coefficients alpha(nu)
(Dirichlet coefficients of L^{-1/2}), the smoothed mollifier weights
beta(nu) = alpha(nu) * L(nu), and the gcd-coupling factor K(m, s) used by the
quadruple correlation sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .arith import (divisor_count_sieve, factorize, prime_sieve, spf_sieve,
                    trial_factorize)
from .class_field import FieldData, Form, HeckeCharacter, kronecker_chi

_THETA_CACHE: dict = {}
_SPF_CACHE: dict = {}
_CHI_CACHE: dict = {}
_PK_CACHE: dict = {}


def _spf(n: int) -> np.ndarray:
    if n not in _SPF_CACHE:
        if len(_SPF_CACHE) > 8:
            _SPF_CACHE.clear()
        _SPF_CACHE[n] = spf_sieve(n)
    return _SPF_CACHE[n]


def clear_caches() -> None:
    _THETA_CACHE.clear()
    _SPF_CACHE.clear()
    _CHI_CACHE.clear()
    _PK_CACHE.clear()


class TableInvariantError(ValueError):
    """A coefficient table violated one of its construction invariants."""


def theta_counts(form: Form, n_max: int, d: int, n_min: int = 1,
                 memory_cap_bytes: int = 2 * 10**9) -> np.ndarray:
    """Representation numbers R_Q(n) = #{(x,y) in Z^2 : Q(x,y) = n}, n <= n_max.

    Row-by-row lattice enumeration: 4a*Q = (2ax + by)^2 + D y^2 bounds
    |y| <= sqrt(4a*n_max/D) and, per y, x to an exact integer window.
    Entries below n_min are not accumulated (used for incremental extension).
    """
    if n_max > 10**7:
        raise ValueError(f"n_max={n_max} exceeds the 1e7 coefficient cap")
    need = 8 * (n_max + 1)
    if need > memory_cap_bytes:
        raise MemoryError(f"theta table needs {need} bytes > cap {memory_cap_bytes}")
    key = (form.a, form.b, form.c, n_max, n_min)
    if key in _THETA_CACHE:
        return _THETA_CACHE[key]
    a, b, c = form.a, form.b, form.c
    R = np.zeros(n_max + 1, dtype=np.int64)
    ymax = math.isqrt(4 * a * n_max // d)
    for y in range(-ymax, ymax + 1):
        disc = 4 * a * n_max - d * y * y
        if disc < 0:
            continue
        s = math.isqrt(disc)
        xlo = -((b * y + s) // (2 * a))          # ceil((-by - s)/2a)
        xhi = (-b * y + s) // (2 * a)
        if xhi < xlo:
            continue
        x = np.arange(xlo, xhi + 1, dtype=np.int64)
        q = (a * x + b * y) * x + c * y * y
        q = q[(q >= n_min) & (q <= n_max)]
        np.add.at(R, q, 1)
    if len(_THETA_CACHE) > 64:
        _THETA_CACHE.clear()
    _THETA_CACHE[key] = R
    return R


@dataclass
class CoefficientTable:
    """r(n) for 1 <= n <= N, stored densely (index 0 unused)."""

    D: int
    char_index: int
    conjugate_index: int
    is_principal: bool
    is_complex: bool
    N: int
    r: np.ndarray
    chi: np.ndarray = dc_field(repr=False, default=None)  # chi_D(n), n <= min(N, chi cache)

    def chi_at(self, p: int) -> int:
        if self.chi is not None and p < len(self.chi):
            return int(self.chi[p])
        from .arith import kronecker_symbol
        return kronecker_symbol(-self.D, p)

    def r_prime_power(self, p: int, k: int) -> float:
        """r(p^k) from the Hecke recursion; valid beyond the table range."""
        if k == 0:
            return 1.0
        if p > self.N:
            raise ValueError(f"prime {p} beyond table range N={self.N}")
        rp = float(self.r[p])
        if k == 1:
            return rp
        chip = float(self.chi_at(p))
        rm2, rm1 = 1.0, rp
        for _ in range(2, k + 1):
            rm2, rm1 = rm1, rp * rm1 - chip * rm2
        return rm1


def _chi_array(fld: FieldData, n_max: int) -> np.ndarray:
    """chi_D(n) for n <= n_max via complete multiplicativity over an spf sieve."""
    key = (fld.D, n_max)
    if key in _CHI_CACHE:
        return _CHI_CACHE[key]
    chi = np.zeros(n_max + 1, dtype=np.int64)
    chi[1] = 1
    spf = _spf(n_max)
    for n in range(2, n_max + 1):
        p = int(spf[n])
        if n == p:
            chi[n] = kronecker_chi(fld, p)
        else:
            chi[n] = chi[p] * chi[n // p]
    if len(_CHI_CACHE) > 8:
        _CHI_CACHE.clear()
    _CHI_CACHE[key] = chi
    return chi


def r_coefficients(fld: FieldData, char: HeckeCharacter, n_max: int,
                   imag_tol: float = 1e-10) -> CoefficientTable:
    """CoefficientTable for (field, character), certified at construction.

    Construction fails loudly if the imaginary residue of the character sum
    exceeds imag_tol, if r(1) != 1, if |r(n)| exceeds tau(n), or if sampled
    Hecke relations fail (any of which would signal an orientation or
    composition bug upstream).
    """
    vals = char.values
    acc = np.zeros(n_max + 1, dtype=complex)
    for i, form in enumerate(fld.forms):
        acc += vals[i] * theta_counts(form, n_max, fld.D)
    acc /= fld.w
    resid = float(np.max(np.abs(acc.imag))) if n_max >= 1 else 0.0
    if resid >= imag_tol:
        raise TableInvariantError(
            f"imaginary residue {resid:.3e} >= {imag_tol:.1e} in r-table "
            f"(D={fld.D}, char {char.index})")
    r = acc.real.copy()
    r[0] = 0.0
    if abs(r[1] - 1.0) > 1e-12:
        raise TableInvariantError(f"r(1) = {r[1]!r} != 1")
    tau = divisor_count_sieve(n_max)
    bad = np.nonzero(np.abs(r[1:]) > tau[1:] + 1e-9)[0]
    if bad.size:
        n = int(bad[0]) + 1
        raise TableInvariantError(f"|r({n})| = {abs(r[n]):.6f} > tau({n}) = {tau[n]}")
    table = CoefficientTable(D=fld.D, char_index=char.index,
                             conjugate_index=char.conjugate_index,
                             is_principal=char.is_principal,
                             is_complex=char.is_complex,
                             N=n_max, r=r, chi=_chi_array(fld, min(n_max, 10**6)))
    _spot_check_hecke(table)
    return table


def _spot_check_hecke(table: CoefficientTable, count: int = 200, tol: float = 1e-8) -> None:
    rng = np.random.default_rng(0)
    r = table.r
    N = table.N
    for _ in range(count):
        m = int(rng.integers(2, max(3, math.isqrt(N))))
        n = int(rng.integers(2, N // m + 1))
        if math.gcd(m, n) != 1:
            continue
        if abs(r[m * n] - r[m] * r[n]) > tol * (1 + abs(r[m] * r[n])):
            raise TableInvariantError(
                f"multiplicativity violated at ({m},{n}): "
                f"r({m * n})={r[m * n]!r} vs r({m})r({n})={r[m] * r[n]!r}")


@dataclass
class HeckeReport:
    checked_coprime: int
    checked_prime_power: int
    checked_divisor_identity: int
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def _prime_power_part(n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """(pk, spf) with pk[n] = p^v_p(n) for the smallest prime p of n."""
    spf = _spf(n_max)
    if n_max in _PK_CACHE:
        return _PK_CACHE[n_max], spf
    pk = np.ones(n_max + 1, dtype=np.int64)
    for n in range(2, n_max + 1):
        p = int(spf[n])
        q = n // p
        pk[n] = p * pk[q] if spf[q] == p else p
    if len(_PK_CACHE) > 8:
        _PK_CACHE.clear()
    _PK_CACHE[n_max] = pk
    return pk, spf


def verify_hecke(table: CoefficientTable, fld: FieldData, tol: float = 1e-8,
                 max_report: int = 20) -> HeckeReport:
    """Exhaustive check of the Hecke relations over all n <= N.

    For every composite n: r(n) = r(p^a) r(n/p^a) with p^a the full power of
    the smallest prime; for every prime power: the recursion
    r(p^{k+1}) = r(p) r(p^k) - chi_D(p) r(p^{k-1}).  For the principal
    character additionally r(n) = sum_{d|n} chi_D(d).
    """
    r = table.r
    N = table.N
    pk, spf = _prime_power_part(N)
    n = np.arange(N + 1)
    k = n[2:] // pk[2:]
    violations = []

    mixed = np.nonzero(k > 1)[0] + 2
    lhs = r[mixed]
    rhs = r[pk[mixed]] * r[mixed // pk[mixed]]
    bad = np.nonzero(np.abs(lhs - rhs) > tol * (1 + np.abs(rhs)))[0]
    for i in bad[:max_report]:
        m = int(mixed[i])
        violations.append(("multiplicativity", m, float(rhs[i]), float(lhs[i])))

    pp = np.nonzero((k == 1) & (n[2:] != spf[2:]))[0] + 2  # pure powers p^a, a >= 2
    checked_pp = 0
    for m in pp:
        m = int(m)
        p = int(spf[m])
        q = m // p
        expect = r[p] * r[q] - table.chi_at(p) * r[q // p]
        checked_pp += 1
        if abs(r[m] - expect) > tol * (1 + abs(expect)):
            if len(violations) < max_report:
                violations.append(("prime-power", m, float(expect), float(r[m])))

    checked_div = 0
    if table.is_principal:
        chi = table.chi if table.chi is not None and len(table.chi) > N else _chi_array(fld, N)
        sigma = np.zeros(N + 1, dtype=np.float64)
        for d in range(1, N + 1):
            if chi[d]:
                sigma[d::d] += chi[d]
        bad = np.nonzero(np.abs(r[1:] - sigma[1:]) > tol)[0]
        checked_div = N
        for i in bad[:max_report]:
            violations.append(("divisor-identity", int(i) + 1, float(sigma[i + 1]), float(r[i + 1])))

    return HeckeReport(checked_coprime=int(mixed.size),
                       checked_prime_power=checked_pp,
                       checked_divisor_identity=checked_div,
                       violations=violations)


def alpha_prime_power(rp: float, chip: int, k: int) -> float:
    """Coefficient of u^k in (1 - rp*u + chip*u^2)^{1/2}.

    Recursion from 2 f' (1 - rp u + chip u^2) = (-rp + 2 chip u) f:
        a_{k+1} = [rp (2k - 1) a_k - 2 chip (k - 2) a_{k-1}] / (2 (k + 1)).
    """
    if k == 0:
        return 1.0
    a_prev, a_cur = 1.0, -rp / 2.0
    for j in range(1, k):
        a_prev, a_cur = a_cur, (rp * (2 * j - 1) * a_cur - 2 * chip * (j - 2) * a_prev) / (2 * (j + 1))
    return a_cur


def alpha_coefficients(table: CoefficientTable, x: int) -> np.ndarray:
    """alpha(nu) for nu <= x: Dirichlet coefficients of L^{-1/2}."""
    x = int(x)
    if x > table.N:
        raise ValueError(f"alpha range {x} exceeds table length {table.N}")
    alpha = np.zeros(x + 1)
    alpha[1] = 1.0
    if x < 2:
        return alpha
    spf = _spf(x)
    pp_val: dict[tuple[int, int], float] = {}
    pk, _ = _prime_power_part(x)
    for n in range(2, x + 1):
        q = int(pk[n])
        if q == n:
            p = int(spf[n])
            k = 0
            m = n
            while m > 1:
                m //= p
                k += 1
            key = (p, k)
            if key not in pp_val:
                pp_val[key] = alpha_prime_power(float(table.r[p]), table.chi_at(p), k)
            alpha[n] = pp_val[key]
        else:
            alpha[n] = alpha[q] * alpha[n // q]
    return alpha


def smoothing_weight(nu: float, x: float) -> float:
    """Piecewise mollifier smoothing: 1 below sqrt(X), 2*log(X/nu)/log X up to X.

    X = 1 is the degenerate eta == 1 mollifier (single term nu = 1, weight 1).
    """
    if x == 1.0:
        return 1.0 if nu == 1 else 0.0
    if nu < math.sqrt(x):
        return 1.0
    if nu <= x:
        return 2.0 * math.log(x / nu) / math.log(x)
    return 0.0


@dataclass
class MollifierTable:
    """alpha and beta = alpha * L up to the cutoff X (index 0 unused)."""

    X: float
    alpha: np.ndarray
    beta: np.ndarray
    log_x: float

    @property
    def nu_max(self) -> int:
        return len(self.beta) - 1


def mollifier_weights(alpha: np.ndarray, x: float) -> MollifierTable:
    """MollifierTable with beta(nu) = alpha(nu) * L(nu) for nu <= X."""
    if x < 1:
        raise ValueError("mollifier cutoff X must be >= 1")
    nmax = int(math.floor(x))
    if nmax > len(alpha) - 1:
        raise ValueError(f"alpha table too short for X={x}")
    beta = np.zeros(nmax + 1)
    for nu in range(1, nmax + 1):
        beta[nu] = alpha[nu] * smoothing_weight(nu, x)
    return MollifierTable(X=float(x), alpha=alpha[: nmax + 1].copy(), beta=beta,
                          log_x=math.log(x) if x > 1 else 0.0)


def k_function(m: int, s: complex, table: CoefficientTable, tol: float = 1e-12) -> float:
    """K(m, s): product over p^a || m of
        (sum_k r(p^k)^2 p^{-ks})^{-1} * (sum_k r(p^{a+k}) r(p^k) p^{-ks}).

    Each series is truncated when the divisor-majorant tail
    sum_{k > K} (k+1)(k+a+1) p^{-k Re s} drops below tol; the majorant never
    consults the computed r values, so the cut stays valid under coefficient
    bugs.  Requires Re s >= 3/4 (covers s = 1 - theta for theta <= 1/4).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    s_re = complex(s).real
    if s_re < 0.75:
        raise ValueError(f"Re s = {s_re} < 3/4 is outside the convergence domain")
    if m == 1:
        return 1.0
    primes, _ = prime_sieve(min(table.N, math.isqrt(m) + 1))
    fac = trial_factorize(m, primes)
    out = 1.0
    real_s = complex(s).imag == 0.0
    sv = s_re if real_s else complex(s)
    for p, a in fac:
        if p > table.N:
            raise ValueError(f"prime factor {p} of m={m} beyond table range N={table.N}")
        out *= _k_local(p, a, sv, table, tol)
        if out == 0.0:
            return 0.0
    return out


def _k_local(p: int, a: int, s, table: CoefficientTable, tol: float) -> float:
    x = float(p) ** (-s) if not isinstance(s, complex) else p ** (-s)
    q = abs(x)
    rp = float(table.r[p])
    chip = table.chi_at(p)
    num = 0.0 if not isinstance(s, complex) else 0.0 + 0.0j
    den = num
    # r(p^j) sequence grown on demand
    rseq = [1.0, rp]

    def r_at(j):
        while len(rseq) <= j:
            rseq.append(rp * rseq[-1] - chip * rseq[-2])
        return rseq[j]

    xk = 1.0 if not isinstance(s, complex) else 1.0 + 0.0j
    k = 0
    while True:
        num = num + r_at(a + k) * r_at(k) * xk
        den = den + r_at(k) ** 2 * xk
        # geometric majorant bound: for j >= k+1 >= 4 successive majorant
        # terms shrink by at least 1.5625*q (and q <= 2^{-3/4})
        ratio = 1.5625 * q
        majorant_tail = (k + 2) * (k + a + 2) * q ** (k + 1) / max(1.0 - ratio, 0.05)
        if majorant_tail < tol and k >= 4:
            break
        k += 1
        xk = xk * x
        if k > 500:
            break
    val = num / den
    return float(val.real) if isinstance(val, complex) else float(val)


def k_table(m_max: int, s: float, table: CoefficientTable, tol: float = 1e-12) -> np.ndarray:
    """K(m, s) for all m <= m_max, assembled multiplicatively over an spf sieve."""
    kv = np.ones(m_max + 1)
    if m_max < 2:
        return kv
    local: dict[tuple[int, int], float] = {}
    pk, spf = _prime_power_part(m_max)
    for n in range(2, m_max + 1):
        q = int(pk[n])
        if q == n:
            p = int(spf[n])
            a = 0
            m = n
            while m > 1:
                m //= p
                a += 1
            key = (p, a)
            if key not in local:
                local[key] = _k_local(p, a, float(s), table, tol)
            kv[n] = local[key]
        else:
            kv[n] = kv[q] * kv[n // q]
    return kv


def abs_alpha_convolution(alpha: np.ndarray) -> np.ndarray:
    """b(n) = sum_{n1 n2 = n} |alpha(n1) alpha(n2)| on the alpha range."""
    x = len(alpha) - 1
    b = np.zeros(x + 1)
    aa = np.abs(alpha)
    for i in range(1, x + 1):
        if aa[i] == 0.0:
            continue
        j_max = x // i
        b[i::i] += aa[i] * aa[1 : j_max + 1]
    return b


def capital_b(n: int, table: CoefficientTable, spf: np.ndarray | None = None) -> float:
    """Multiplicative majorant: B(p) = |r(p)|, B(p^a) = a + 1 for a > 1."""
    if spf is None:
        spf = _spf(n) if n >= 2 else None
    out = 1.0
    m = n
    while m > 1:
        p = int(spf[m])
        a = 0
        while m % p == 0:
            m //= p
            a += 1
        out *= abs(float(table.r[p])) if a == 1 else (a + 1)
    return out
