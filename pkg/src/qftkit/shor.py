"""Order finding and the factoring retry loop.

The quantum step comes in two interchangeable backends.  The gate backend
assembles the full register pipeline (Hadamards, the known-power product
tree, the exact transform) and reads the measurement distribution off a
sparse statevector run; it is exact but only fits small moduli.  The
analytic backend evaluates the same distribution in closed form from the
true multiplicative order, which scales to any desk-size modulus.  Both
feed continued-fraction post-processing and the classical retry loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import revarith
from .circuit import Circuit, CircuitBuilder
from .errors import CapacityError, QftkitError
from .phasest import failure_bound
from .qft_pow2 import bit_reversed_indices, standard_qft
from .sim import DEFAULT_SEED, run_sparse, sparse_marginal

MAX_GATE_MODULUS = 15
MAX_ANALYTIC_MODULUS = 2048
MAX_TASK_MODULUS = 1 << 20
DEFAULT_MAX_RETRIES = 32

# copies per register when the measured-transform variant stands in for the
# exact one; failure_bound(2n, 64) stays near 1% at gate-backend sizes
LOGDEPTH_CHANNEL_K = 64

BACKENDS = ("gate", "analytic", "auto")
QFT_VARIANTS = ("standard", "logdepth")

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class LuckyFactor(QftkitError):
    """The chosen base already shares a divisor with the modulus."""

    def __init__(self, a: int, modulus: int, divisor: int):
        super().__init__(f"gcd({a}, {modulus}) = {divisor} is a nontrivial divisor")
        self.a = a
        self.modulus = modulus
        self.divisor = divisor


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin (exact far beyond the desk cap)."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d = n - 1
    s = (d & -d).bit_length() - 1
    d >>= s
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def perfect_power_root(n: int) -> tuple[int, int] | None:
    """(p, e) with p**e == n and e >= 2, preferring the largest exponent."""
    for e in range(n.bit_length(), 1, -1):
        p = round(n ** (1.0 / e))
        for cand in (p - 1, p, p + 1):
            if cand >= 2 and cand**e == n:
                return cand, e
    return None


def multiplicative_order(a: int, modulus: int) -> int:
    if math.gcd(a, modulus) != 1:
        raise ValueError(f"{a} is not a unit mod {modulus}")
    r, v = 1, a % modulus
    while v != 1:
        v = v * a % modulus
        r += 1
    return r


@dataclass(frozen=True)
class FactorTask:
    """One order-finding attempt: modulus, base, and sampling seed."""

    modulus: int
    a: int
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.modulus < 3 or self.modulus % 2 == 0:
            raise ValueError("modulus must be odd and at least 3")
        if self.modulus >= MAX_TASK_MODULUS:
            raise CapacityError(f"modulus {self.modulus} exceeds cap {MAX_TASK_MODULUS}")
        if is_prime(self.modulus):
            raise ValueError("modulus must be composite")
        if not 2 <= self.a <= self.modulus - 1:
            raise ValueError(f"base {self.a} not in [2, {self.modulus - 1}]")

    @property
    def n_bits(self) -> int:
        return self.modulus.bit_length()


@dataclass(frozen=True)
class OrderResult:
    """One measured y with its continued-fraction reading."""

    y: int
    m: int
    convergent: tuple[int, int] | None
    verified: bool


def precompute_powers(a: int, modulus: int) -> tuple[int, ...]:
    """b_j = a^(2^j) mod modulus for j < 2n, by repeated squaring."""
    d = math.gcd(a, modulus)
    if d > 1:
        raise LuckyFactor(a, modulus, d)
    return tuple(revarith.precompute_powers(a, modulus, 2 * modulus.bit_length()))


def build_order_circuit(modulus: int, a: int) -> Circuit:
    """Hadamards, the known-power product tree, then the exact transform.

    Data wires: x register on [0, 2n), product register on [2n, 2n + nb).
    The transform leaves the x register in bit-reversed wire order, recorded
    in metadata the same way the bare transform builders do.
    """
    if modulus > MAX_GATE_MODULUS:
        raise CapacityError(f"modulus {modulus} exceeds gate-backend cap {MAX_GATE_MODULUS}")
    powers = precompute_powers(a, modulus)
    n_x = len(powers)
    nb = modulus.bit_length()
    b = CircuitBuilder(n_x + nb)
    for w in range(n_x):
        b.h(w)
    b.inline(revarith.build_iterated_product(modulus, list(powers)), list(range(n_x + nb)))
    b.inline(standard_qft(n_x), list(range(n_x)))
    return b.build(
        metadata={
            "kind": "order_finding",
            "modulus": modulus,
            "a": a,
            "n_x": n_x,
            "output_permutation": list(reversed(range(n_x))),
        }
    )


_GATE_CACHE: dict[tuple[int, int], np.ndarray] = {}
_ANALYTIC_CACHE: dict[tuple[int, int], np.ndarray] = {}


def gate_distribution(modulus: int, a: int) -> np.ndarray:
    """Exact y distribution of the order-finding circuit, by sparse simulation."""
    key = (modulus, a)
    if key not in _GATE_CACHE:
        circuit = build_order_circuit(modulus, a)
        n_x = 2 * modulus.bit_length()
        res = run_sparse(circuit, x=0)
        probs = sparse_marginal(res.amplitudes, list(range(n_x)))
        _GATE_CACHE[key] = probs[bit_reversed_indices(n_x)]
    return _GATE_CACHE[key]


def analytic_distribution(modulus: int, a: int) -> np.ndarray:
    """Closed-form y distribution of order finding from the true order r.

    The x register holds each residue class mod r in a coset of size
    floor(M/r) or ceil(M/r); each coset contributes a Dirichlet-kernel term
    sin^2(pi c theta)/sin^2(pi theta) at theta = r y / M (c^2 where theta is
    an integer).  Kernel arguments are reduced mod 1 in exact integers
    before any trig so the peaks stay accurate.
    """
    if modulus > MAX_ANALYTIC_MODULUS:
        raise CapacityError(f"modulus {modulus} exceeds analytic cap {MAX_ANALYTIC_MODULUS}")
    if math.gcd(a, modulus) != 1:
        raise ValueError(f"{a} is not a unit mod {modulus}")
    key = (modulus, a)
    if key not in _ANALYTIC_CACHE:
        big_m = 1 << (2 * modulus.bit_length())
        r = multiplicative_order(a, modulus)
        full, rem = divmod(big_m, r)
        ry_mod = (r * np.arange(big_m, dtype=np.int64)) % big_m
        integral = ry_mod == 0
        denom = np.sin(np.pi * (ry_mod / big_m)) ** 2
        denom[integral] = 1.0

        def kernel(c: int) -> np.ndarray:
            num = np.sin(np.pi * ((c * ry_mod % big_m) / big_m)) ** 2
            return np.where(integral, float(c) ** 2, num / denom)

        probs = (rem * kernel(full + 1) + (r - rem) * kernel(full)) / float(big_m) ** 2
        _ANALYTIC_CACHE[key] = probs / probs.sum()
    return _ANALYTIC_CACHE[key]


def continued_fraction_post(y: int, m: int, modulus: int) -> tuple[int, int] | None:
    """Best convergent k/r of y/m with k < r < modulus and |y/m - k/r| <= 1/m.

    The largest qualifying denominator wins; y = 0 yields (0, 1); None when
    no convergent qualifies.  Garbage y is tolerated, it just fails to
    produce a convergent (or produces one that order verification rejects).
    """
    if not 0 <= y < m:
        raise ValueError(f"sample {y} not in [0, {m})")
    if y == 0:
        return 0, 1
    target = Fraction(y, m)
    bound = Fraction(1, m)
    best = None
    h2, h1, k2, k1 = 0, 1, 1, 0
    num, den = y, m
    while den:
        q, rest = divmod(num, den)
        h = q * h1 + h2
        k = q * k1 + k2
        if k >= modulus:
            break
        if 0 <= h < k and abs(target - Fraction(h, k)) <= bound:
            best = (h, k)
        h2, h1, k2, k1 = h1, h, k1, k
        num, den = den, rest
    return best


def _resolve_backend(backend: str, modulus: int) -> str:
    if backend not in BACKENDS:
        raise ValueError(f"backend must be one of {BACKENDS}")
    if backend == "auto":
        return "gate" if modulus <= MAX_GATE_MODULUS else "analytic"
    return backend


def order_finding_run(
    task: FactorTask,
    backend: str = "auto",
    qft: str = "standard",
    rng: np.random.Generator | None = None,
) -> OrderResult:
    """Sample one y and post-process it into a candidate order.

    With the measured-transform variant selected, the exact distribution is
    mixed with a uniform floor at the erase-failure bound: a failed erase
    leaves which-x information behind, which dephases the coset superposition
    and makes the readout uniform.
    """
    if qft not in QFT_VARIANTS:
        raise ValueError(f"qft must be one of {QFT_VARIANTS}")
    resolved = _resolve_backend(backend, task.modulus)
    if resolved == "gate":
        probs = gate_distribution(task.modulus, task.a)
    else:
        probs = analytic_distribution(task.modulus, task.a)
    if qft == "logdepth":
        miss = failure_bound(2 * task.n_bits, LOGDEPTH_CHANNEL_K)
        probs = (1.0 - miss) * probs + miss / probs.size
    if rng is None:
        rng = np.random.default_rng(DEFAULT_SEED if task.seed is None else task.seed)
    y = int(rng.choice(probs.size, p=probs))
    conv = continued_fraction_post(y, probs.size, task.modulus)
    verified = conv is not None and pow(task.a, conv[1], task.modulus) == 1
    return OrderResult(y=y, m=probs.size, convergent=conv, verified=verified)


def factor(
    modulus: int,
    seed: int | None = None,
    backend: str = "auto",
    qft: str = "standard",
    max_retries: int = DEFAULT_MAX_RETRIES,
    samples_per_a: int = 1,
) -> dict:
    """Classical screens, then order-finding attempts until a divisor drops out.

    Returns {"divisor", "attempts", "trace"}.  A returned divisor always
    divides the modulus and is nontrivial; an exhausted retry budget returns
    divisor None with the full trace.  Even and prime-power inputs are
    dispatched classically without any quantum sampling.
    """
    if modulus < 4:
        raise ValueError("nothing to factor below 4")
    if modulus >= MAX_TASK_MODULUS:
        raise CapacityError(f"modulus {modulus} exceeds cap {MAX_TASK_MODULUS}")
    if is_prime(modulus):
        raise ValueError(f"{modulus} is prime; no nontrivial divisor exists")
    if modulus % 2 == 0:
        return {"divisor": 2, "attempts": 0, "trace": [{"stage": "screen", "reason": "even"}]}
    root = perfect_power_root(modulus)
    if root is not None:
        trace = [{"stage": "screen", "reason": "prime_power", "base": root[0], "exponent": root[1]}]
        return {"divisor": root[0], "attempts": 0, "trace": trace}
    rng = np.random.default_rng(DEFAULT_SEED if seed is None else seed)
    trace: list[dict] = []
    for attempt in range(1, max_retries + 1):
        a = int(rng.integers(2, modulus - 1, endpoint=True))
        d = math.gcd(a, modulus)
        if d > 1:
            trace.append({"attempt": attempt, "a": a, "outcome": "lucky_gcd", "divisor": d})
            return {"divisor": d, "attempts": attempt, "trace": trace}
        task = FactorTask(modulus, a)
        for _ in range(samples_per_a):
            res = order_finding_run(task, backend=backend, qft=qft, rng=rng)
            rec: dict = {"attempt": attempt, "a": a, "y": res.y}
            if not res.verified:
                rec["outcome"] = "unverified_order" if res.convergent else "no_convergent"
                trace.append(rec)
                continue
            r = res.convergent[1]
            rec["order"] = r
            if r % 2:
                rec["outcome"] = "odd_order"
                trace.append(rec)
                continue
            d = math.gcd(pow(a, r // 2, modulus) - 1, modulus)
            if 1 < d < modulus:
                if modulus % d:
                    raise QftkitError(f"internal: {d} does not divide {modulus}")
                rec["outcome"] = "divisor"
                rec["divisor"] = d
                trace.append(rec)
                return {"divisor": d, "attempts": attempt, "trace": trace}
            rec["outcome"] = "trivial_gcd"
            trace.append(rec)
    return {"divisor": None, "attempts": max_retries, "trace": trace}
