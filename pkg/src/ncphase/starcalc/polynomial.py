"""Exact multivariate polynomials on phase space and the Bopp-shift star product."""
from __future__ import annotations

import ast
from functools import lru_cache
from math import factorial
from typing import Dict, Iterable, Mapping, Sequence, Tuple

import numpy as np

MAX_DIM = 8
MAX_DEGREE = 8

Exponent = Tuple[int, ...]


class PhasePolynomial:
    """Polynomial ``sum_a c_a chi^a`` with complex coefficients keyed by exponent tuples.

    Zero coefficients are never stored, so two polynomials are equal exactly
    when their term dictionaries are.

    Parameters
    ----------
    dim : int
        number of phase-space coordinates
    terms : mapping
        exponent tuple -> coefficient
    """

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms: Mapping[Exponent, complex] | None = None):
        if not 1 <= dim <= 2 * MAX_DIM:
            raise ValueError(f"dimension must be in 1..{2 * MAX_DIM}, got {dim}")
        self.dim = dim
        clean: Dict[Exponent, complex] = {}
        for e, c in (terms or {}).items():
            e = tuple(int(k) for k in e)
            if len(e) != dim or min(e) < 0:
                raise ValueError(f"bad exponent {e} for dimension {dim}")
            c = complex(c)
            if c != 0:
                clean[e] = clean.get(e, 0) + c
        self.terms = {e: c for e, c in clean.items() if c != 0}

    # construction --------------------------------------------------------
    @classmethod
    def constant(cls, dim: int, value: complex = 1.0) -> "PhasePolynomial":
        return cls(dim, {(0,) * dim: value})

    @classmethod
    def coordinate(cls, dim: int, index: int, coeff: complex = 1.0) -> "PhasePolynomial":
        e = [0] * dim
        e[index] = 1
        return cls(dim, {tuple(e): coeff})

    @classmethod
    def linear(cls, coeffs: Sequence[complex]) -> "PhasePolynomial":
        """``sum_i coeffs[i] chi_i``."""
        dim = len(coeffs)
        return sum((cls.coordinate(dim, i, c) for i, c in enumerate(coeffs) if c != 0), cls(dim))

    @classmethod
    def parse(cls, text: str, names: Sequence[str]) -> "PhasePolynomial":
        """Parse an arithmetic expression such as ``"x1**2 - 0.5j*p1*x2 + 3"``."""
        dim = len(names)
        index = {name: i for i, name in enumerate(names)}

        def walk(node):
            if isinstance(node, ast.Expression):
                return walk(node.body)
            if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
                return cls.constant(dim, node.value)
            if isinstance(node, ast.Name):
                if node.id not in index:
                    raise ValueError(f"unknown variable {node.id!r}; expected one of {list(names)}")
                return cls.coordinate(dim, index[node.id])
            if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
                v = walk(node.operand)
                return -v if isinstance(node.op, ast.USub) else v
            if isinstance(node, ast.BinOp):
                left = walk(node.left)
                if isinstance(node.op, ast.Pow):
                    if not (isinstance(node.right, ast.Constant) and isinstance(node.right.value, int)):
                        raise ValueError("exponents must be non-negative integer literals")
                    return left ** node.right.value
                right = walk(node.right)
                if isinstance(node.op, ast.Add):
                    return left + right
                if isinstance(node.op, ast.Sub):
                    return left - right
                if isinstance(node.op, ast.Mult):
                    return left * right
            raise ValueError(f"unsupported syntax in polynomial: {ast.dump(node)}")

        return walk(ast.parse(text, mode="eval"))

    # inspection ----------------------------------------------------------
    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def __repr__(self):
        if not self.terms:
            return f"PhasePolynomial({self.dim}, 0)"
        parts = []
        for e, c in sorted(self.terms.items()):
            mono = "*".join(f"z{i}" + (f"**{k}" if k > 1 else "") for i, k in enumerate(e) if k)
            parts.append(f"({c:.6g})" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)

    def __eq__(self, other):
        if isinstance(other, (int, float, complex)):
            other = PhasePolynomial.constant(self.dim, other)
        return isinstance(other, PhasePolynomial) and self.dim == other.dim and self.terms == other.terms

    def coefficient(self, exponent: Iterable[int]) -> complex:
        return self.terms.get(tuple(exponent), 0j)

    def max_abs_diff(self, other: "PhasePolynomial") -> float:
        keys = set(self.terms) | set(other.terms)
        return max((abs(self.coefficient(k) - other.coefficient(k)) for k in keys), default=0.0)

    def chop(self, tol: float = 1e-14) -> "PhasePolynomial":
        return PhasePolynomial(self.dim, {e: c for e, c in self.terms.items() if abs(c) > tol})

    # arithmetic ----------------------------------------------------------
    def _coerce(self, other) -> "PhasePolynomial":
        if isinstance(other, PhasePolynomial):
            if other.dim != self.dim:
                raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
            return other
        return PhasePolynomial.constant(self.dim, other)

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, 0) + c
        return PhasePolynomial(self.dim, terms)

    __radd__ = __add__

    def __neg__(self):
        return PhasePolynomial(self.dim, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        terms: Dict[Exponent, complex] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, 0) + c1 * c2
        return PhasePolynomial(self.dim, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        out = PhasePolynomial.constant(self.dim)
        for _ in range(k):
            out = out * self
        return out

    def conj(self) -> "PhasePolynomial":
        return PhasePolynomial(self.dim, {e: np.conj(c) for e, c in self.terms.items()})

    def derivative(self, multi_index: Sequence[int]) -> "PhasePolynomial":
        """Exact partial derivative ``d^alpha``."""
        alpha = tuple(multi_index)
        terms = {}
        for e, c in self.terms.items():
            if any(a > k for a, k in zip(alpha, e)):
                continue
            w = 1
            for a, k in zip(alpha, e):
                w *= factorial(k) // factorial(k - a)
            terms[tuple(k - a for a, k in zip(alpha, e))] = c * w
        return PhasePolynomial(self.dim, terms)

    def substitute_linear(self, M) -> "PhasePolynomial":
        """Return ``p(M y)`` as a polynomial in ``y`` (``M`` is ``dim x dim'``)."""
        M = np.asarray(M)
        new_dim = M.shape[1]
        rows = [PhasePolynomial.linear(M[i]) if np.any(M[i]) else PhasePolynomial(new_dim) for i in range(self.dim)]
        out = PhasePolynomial(new_dim)
        for e, c in self.terms.items():
            term = PhasePolynomial.constant(new_dim, c)
            for i, k in enumerate(e):
                if k:
                    term = term * rows[i] ** k
            out = out + term
        return out

    def embed(self, dim: int, coords: Sequence[int]) -> "PhasePolynomial":
        """Place this polynomial's variables at positions ``coords`` of a ``dim``-variable space."""
        terms = {}
        for e, c in self.terms.items():
            full = [0] * dim
            for i, k in zip(coords, e):
                full[i] = k
            terms[tuple(full)] = c
        return PhasePolynomial(dim, terms)

    def __call__(self, *coords):
        """Evaluate with broadcasting; one array per coordinate."""
        if len(coords) == 1 and self.dim > 1:
            arr = np.asarray(coords[0])
            coords = tuple(arr[..., i] for i in range(self.dim))
        if len(coords) != self.dim:
            raise ValueError(f"expected {self.dim} coordinate arrays")
        coords = [np.asarray(c) for c in coords]
        out = 0j
        for e, c in self.terms.items():
            term = c
            for x, k in zip(coords, e):
                if k:
                    term = term * x**k
            out = out + term
        return out

    def arrays(self):
        """Exponent matrix (terms x dim) and coefficient vector."""
        if not self.terms:
            return np.zeros((0, self.dim), dtype=np.int64), np.zeros(0, dtype=complex)
        keys = list(self.terms)
        return np.array(keys, dtype=np.int64), np.array([self.terms[k] for k in keys], dtype=complex)

    @classmethod
    def from_arrays(cls, dim: int, exps: np.ndarray, coeffs: np.ndarray) -> "PhasePolynomial":
        if len(coeffs) == 0:
            return cls(dim)
        base = int(exps.max()) + 1
        keys = np.zeros(len(exps), dtype=np.int64)
        for j in range(dim):
            keys = keys * base + exps[:, j]
        uniq, inv = np.unique(keys, return_inverse=True)
        summed = np.zeros(len(uniq), dtype=complex)
        np.add.at(summed, inv, coeffs)
        first = np.zeros(len(uniq), dtype=np.int64)
        first[inv[::-1]] = np.arange(len(inv))[::-1]
        return cls(dim, {tuple(int(v) for v in exps[i]): c for i, c in zip(first, summed)})


# ----------------------------------------------------------------- star series

def _falling_table(nmax: int) -> np.ndarray:
    """``T[n, k] = n! / (n-k)!`` (zero for k > n)."""
    T = np.zeros((nmax + 1, nmax + 1))
    for n in range(nmax + 1):
        for k in range(n + 1):
            T[n, k] = factorial(n) // factorial(n - k)
    return T


@lru_cache(maxsize=64)
def _series(lam_key: bytes, dim: int, order: int):
    """Terms ``(alpha, beta, c)`` of ``sum_k (i/2)^k/k! (sum_rs L_rs d^a_r d^b_s)^k``
    up to ``order``; ``alpha`` acts on the left factor, ``beta`` on the right."""
    L = np.frombuffer(lam_key).reshape(dim, dim)
    pairs = [(r, s, L[r, s]) for r in range(dim) for s in range(dim) if L[r, s] != 0]
    zero = (0,) * (2 * dim)
    current = {zero: 1.0 + 0j}
    out = {zero: 1.0 + 0j}
    for k in range(1, order + 1):
        nxt: Dict[Exponent, complex] = {}
        for e, c in current.items():
            for r, s, v in pairs:
                f = list(e)
                f[r] += 1
                f[dim + s] += 1
                f = tuple(f)
                nxt[f] = nxt.get(f, 0) + c * v
        current = nxt
        scale = (0.5j) ** k / factorial(k)
        for e, c in current.items():
            out[e] = out.get(e, 0) + scale * c
    keys = [e for e, c in out.items() if c != 0]
    ex = np.array(keys, dtype=np.int64).reshape(-1, 2 * dim)
    co = np.array([out[e] for e in keys], dtype=complex)
    return ex[:, :dim], ex[:, dim:], co


def star_series(Lambda: np.ndarray, order: int):
    Lambda = np.ascontiguousarray(Lambda, dtype=float)
    return _series(Lambda.tobytes(), Lambda.shape[0], order)


def _check_degree(p: PhasePolynomial):
    if p.degree > MAX_DEGREE:
        raise ValueError(f"polynomial degree {p.degree} exceeds the cap of {MAX_DEGREE}")


def bopp_star(a: PhasePolynomial, b: PhasePolynomial, Lambda: np.ndarray) -> PhasePolynomial:
    """``a exp(i/2 <-d Lambda ->d) b`` evaluated exactly (the series terminates)."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if Lambda.shape != (a.dim, a.dim):
        raise ValueError("star structure does not match polynomial dimension")
    ea, ca = a.arrays()
    eb, cb = b.arrays()
    if len(ca) == 0 or len(cb) == 0:
        return PhasePolynomial(a.dim)
    order = min(a.degree, b.degree)
    alpha, beta, cs = star_series(Lambda, order)
    T = _falling_table(max(int(ea.max()), int(eb.max())))

    # all (left term, right term, series term) triples, pruned by degree
    I, J, K = np.meshgrid(np.arange(len(ca)), np.arange(len(cb)), np.arange(len(cs)), indexing="ij")
    I, J, K = I.ravel(), J.ravel(), K.ravel()
    ga, gb = ea[I] - alpha[K], eb[J] - beta[K]
    ok = (ga >= 0).all(axis=1) & (gb >= 0).all(axis=1)
    I, J, K, ga, gb = I[ok], J[ok], K[ok], ga[ok], gb[ok]
    wa = np.prod(T[ea[I], alpha[K]], axis=1)
    wb = np.prod(T[eb[J], beta[K]], axis=1)
    coeff = ca[I] * cb[J] * cs[K] * wa * wb
    return PhasePolynomial.from_arrays(a.dim, ga + gb, coeff)


def apply_bidifferential(tensor: PhasePolynomial, Lambda: np.ndarray) -> PhasePolynomial:
    """Act with ``exp(i/2 sum_rs L_rs d/du_r d/dv_s)`` on a polynomial in ``(u, v)``.

    Used to compose several star structures one after another on ``a(u) b(v)``
    before identifying ``u = v``.
    """
    dim = tensor.dim // 2
    out = tensor
    current = tensor
    k = 0
    while current.terms:
        k += 1
        nxt = PhasePolynomial(tensor.dim)
        for r in range(dim):
            for s in range(dim):
                if Lambda[r, s] == 0:
                    continue
                idx = [0] * (2 * dim)
                idx[r] += 1
                idx[dim + s] += 1
                nxt = nxt + Lambda[r, s] * current.derivative(idx)
        current = nxt
        out = out + ((0.5j) ** k / factorial(k)) * current
    return out


def tensor_product(a: PhasePolynomial, b: PhasePolynomial) -> PhasePolynomial:
    dim = a.dim
    return a.embed(2 * dim, range(dim)) * b.embed(2 * dim, range(dim, 2 * dim))


def contract(tensor: PhasePolynomial) -> PhasePolynomial:
    """Identify ``u = v``."""
    dim = tensor.dim // 2
    terms: Dict[Exponent, complex] = {}
    for e, c in tensor.terms.items():
        f = tuple(e[i] + e[dim + i] for i in range(dim))
        terms[f] = terms.get(f, 0) + c
    return PhasePolynomial(dim, terms)
