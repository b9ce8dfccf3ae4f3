"""Sparse multivariate polynomial fields with tensor-valued coefficients.

Polynomial fields stand in for the smooth test fields of the theory: they
are closed under differentiation and products, and every integral the
package needs is computed by quadrature rules that are exact for the
field's total degree.  A field maps an exponent multi-index to the tensor
coefficient of that monomial; evaluation and calculus introduce no
approximation beyond IEEE rounding.

Fields default to three coordinates.  Two- and one-variable fields (used
for surface-patch heights and mollifier profiles) share the same engine.
"""

from __future__ import annotations

from itertools import product as _iterproduct

import numpy as np

__all__ = [
    "PolyField",
    "field_einsum",
    "grad",
    "div",
    "dot",
    "ddot",
    "monomials_up_to",
    "random_field",
    "allclose",
]


def _as_key(key, nvars: int) -> tuple:
    key = tuple(int(e) for e in key)
    if len(key) != nvars:
        raise ValueError(f"exponent tuple {key} does not have {nvars} entries")
    if any(e < 0 for e in key):
        raise ValueError(f"negative exponent in {key}")
    return key


class PolyField:
    """Tensor-valued polynomial in ``nvars`` coordinates, stored sparsely."""

    __slots__ = ("terms", "shape", "nvars")

    def __init__(self, terms: dict, shape=(), nvars: int = 3):
        self.shape = tuple(shape)
        self.nvars = int(nvars)
        clean = {}
        for key, coeff in terms.items():
            arr = np.asarray(coeff, dtype=float)
            if arr.shape != self.shape:
                raise ValueError(f"coefficient shape {arr.shape} != field shape {self.shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError("coefficients must be finite")
            if np.any(arr != 0.0):
                clean[_as_key(key, self.nvars)] = arr.copy()
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, shape=(), nvars: int = 3) -> "PolyField":
        return cls({}, shape, nvars)

    @classmethod
    def constant(cls, value, nvars: int = 3) -> "PolyField":
        arr = np.asarray(value, dtype=float)
        return cls({(0,) * nvars: arr}, arr.shape, nvars)

    @classmethod
    def monomial(cls, exponents, coeff, nvars: int | None = None) -> "PolyField":
        exponents = tuple(int(e) for e in exponents)
        if nvars is None:
            nvars = len(exponents)
        arr = np.asarray(coeff, dtype=float)
        return cls({exponents: arr}, arr.shape, nvars)

    @classmethod
    def coordinate(cls, i: int, nvars: int = 3) -> "PolyField":
        key = tuple(1 if j == i else 0 for j in range(nvars))
        return cls({key: np.asarray(1.0)}, (), nvars)

    # -- basic queries -----------------------------------------------------

    @property
    def degree(self) -> int:
        """Max total degree over monomials with a nonzero coefficient (0 for the zero field)."""
        if not self.terms:
            return 0
        return max(sum(k) for k in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self) -> str:
        return f"PolyField(shape={self.shape}, nvars={self.nvars}, nterms={len(self.terms)}, degree={self.degree})"

    # -- evaluation --------------------------------------------------------

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(self.shape)
        for key, coeff in self.terms.items():
            mono = 1.0
            for xi, e in zip(x, key):
                if e:
                    mono *= xi**e
            out = out + mono * coeff
        if self.shape == ():
            return float(out)
        return out

    def eval_many(self, X) -> np.ndarray:
        """Evaluate at the rows of ``X`` (m, nvars) -> (m, *shape)."""
        X = np.asarray(X, dtype=float)
        m = X.shape[0]
        out = np.zeros((m,) + self.shape)
        expand = (slice(None),) + (None,) * len(self.shape)
        for key, coeff in self.terms.items():
            mono = np.ones(m)
            for i, e in enumerate(key):
                if e:
                    mono = mono * X[:, i] ** e
            out += mono[expand] * coeff
        return out

    # -- linear structure --------------------------------------------------

    def __add__(self, other: "PolyField") -> "PolyField":
        self._check_compatible(other)
        terms = {k: v.copy() for k, v in self.terms.items()}
        for k, v in other.terms.items():
            terms[k] = terms[k] + v if k in terms else v
        return PolyField(terms, self.shape, self.nvars)

    def __sub__(self, other: "PolyField") -> "PolyField":
        return self + (-other)

    def __neg__(self) -> "PolyField":
        return PolyField({k: -v for k, v in self.terms.items()}, self.shape, self.nvars)

    def __mul__(self, scalar: float) -> "PolyField":
        s = float(scalar)
        return PolyField({k: s * v for k, v in self.terms.items()}, self.shape, self.nvars)

    __rmul__ = __mul__

    def _check_compatible(self, other: "PolyField") -> None:
        if self.shape != other.shape or self.nvars != other.nvars:
            raise ValueError("incompatible fields")

    # -- calculus ----------------------------------------------------------

    def diff(self, var: int) -> "PolyField":
        """Exact partial derivative with respect to coordinate ``var``."""
        terms: dict = {}
        for key, coeff in self.terms.items():
            e = key[var]
            if e == 0:
                continue
            rk = key[:var] + (e - 1,) + key[var + 1 :]
            contrib = e * coeff
            terms[rk] = terms[rk] + contrib if rk in terms else contrib
        return PolyField(terms, self.shape, self.nvars)

    def jacobian(self) -> "PolyField":
        """Append a derivative axis: out[..., v] = d(self)/dx_v."""
        shape = self.shape + (self.nvars,)
        terms: dict = {}
        for key, coeff in self.terms.items():
            for v in range(self.nvars):
                e = key[v]
                if e == 0:
                    continue
                rk = key[:v] + (e - 1,) + key[v + 1 :]
                if rk not in terms:
                    terms[rk] = np.zeros(shape)
                terms[rk][..., v] += e * coeff
        return PolyField(terms, shape, self.nvars)

    # -- tensor operations -------------------------------------------------

    def map_coeffs(self, fn, shape) -> "PolyField":
        """Apply a linear map to every coefficient (e.g. a fixed contraction)."""
        return PolyField({k: np.asarray(fn(v), dtype=float) for k, v in self.terms.items()}, shape, self.nvars)

    def contract(self, subscripts: str, *operands) -> "PolyField":
        """np.einsum each coefficient against fixed arrays."""
        ops = [np.asarray(o, dtype=float) for o in operands]
        out_terms = {}
        out_shape = None
        for k, v in self.terms.items():
            res = np.einsum(subscripts, v, *ops)
            res = np.asarray(res, dtype=float)
            if out_shape is None:
                out_shape = res.shape
            out_terms[k] = res
        if out_shape is None:
            probe = np.einsum(subscripts, np.zeros(self.shape), *ops)
            out_shape = np.asarray(probe).shape
        return PolyField(out_terms, out_shape, self.nvars)

    def compose(self, coords: list["PolyField"]) -> "PolyField":
        """Substitute scalar polynomial ``coords`` for the coordinates.

        All entries of ``coords`` must be scalar fields in a common variable
        count; the result lives in that count.  Exact expansion.
        """
        if len(coords) != self.nvars:
            raise ValueError("need one substitution polynomial per coordinate")
        nv2 = coords[0].nvars
        for c in coords:
            if c.shape != () or c.nvars != nv2:
                raise ValueError("substitutions must be scalar fields in a common variable count")
        # cache powers of each substituted coordinate as plain dicts
        pows: list[list[dict]] = []
        for i, c in enumerate(coords):
            maxe = max((k[i] for k in self.terms), default=0)
            plist = [{(0,) * nv2: 1.0}]
            for _ in range(maxe):
                plist.append(_sp_mul(plist[-1], c.terms, nv2))
            pows.append(plist)
        out: dict = {}
        for key, coeff in self.terms.items():
            sp = {(0,) * nv2: 1.0}
            for i, e in enumerate(key):
                if e:
                    sp = _sp_mul(sp, pows[i][e], nv2)
            for k2, s in sp.items():
                contrib = s * coeff
                out[k2] = out[k2] + contrib if k2 in out else contrib
        return PolyField(out, self.shape, nv2)


def _sp_mul(a: dict, b: dict, nvars: int) -> dict:
    """Product of scalar polynomials given as {key: float} or {key: 0-d array}."""
    out: dict = {}
    for ka, va in a.items():
        fa = float(va)
        for kb, vb in b.items():
            k = tuple(ka[i] + kb[i] for i in range(nvars))
            out[k] = out.get(k, 0.0) + fa * float(vb)
    return out


def field_einsum(subscripts: str, a: PolyField, b: PolyField) -> PolyField:
    """Pointwise einsum product of two fields; monomial exponents add."""
    if a.nvars != b.nvars:
        raise ValueError("fields live in different coordinates")
    out_terms: dict = {}
    out_shape = np.einsum(subscripts, np.zeros(a.shape), np.zeros(b.shape)).shape
    for ka, va in a.terms.items():
        for kb, vb in b.terms.items():
            k = tuple(ka[i] + kb[i] for i in range(a.nvars))
            res = np.einsum(subscripts, va, vb)
            out_terms[k] = out_terms[k] + res if k in out_terms else np.asarray(res, dtype=float)
    return PolyField(out_terms, out_shape, a.nvars)


def grad(U: PolyField) -> PolyField:
    """(grad U)_{ij} = dU_i/dx_j for a vector field."""
    if U.shape != (3,) or U.nvars != 3:
        raise ValueError("grad expects a 3-vector field in three coordinates")
    return U.jacobian()


def div(field: PolyField) -> PolyField:
    """Divergence: vector -> scalar (d_i W_i), 2-tensor -> vector (d_j M_{ij})."""
    jac = field.jacobian()
    if field.shape == (3,):
        return jac.map_coeffs(lambda A: np.einsum("ii->", A), ())
    if field.shape == (3, 3):
        return jac.map_coeffs(lambda A: np.einsum("ijj->i", A), (3,))
    raise ValueError(f"div not defined for shape {field.shape}")


def dot(a: PolyField, b: PolyField) -> PolyField:
    return field_einsum("i,i->", a, b)


def ddot(a: PolyField, b: PolyField) -> PolyField:
    return field_einsum("ij,ij->", a, b)


def monomials_up_to(degree: int, nvars: int = 3):
    """All exponent tuples of total degree <= degree."""
    for key in _iterproduct(range(degree + 1), repeat=nvars):
        if sum(key) <= degree:
            yield key


def random_field(rng: np.random.Generator, shape, degree: int, nvars: int = 3, scale: float = 1.0) -> PolyField:
    """Dense random field with coefficients uniform in [-scale, scale]."""
    terms = {key: rng.uniform(-scale, scale, size=shape) for key in monomials_up_to(degree, nvars)}
    return PolyField(terms, shape, nvars)


def allclose(a: PolyField, b: PolyField, tol: float = 1e-13) -> bool:
    if a.shape != b.shape or a.nvars != b.nvars:
        return False
    keys = set(a.terms) | set(b.terms)
    zero = np.zeros(a.shape)
    return all(np.allclose(a.terms.get(k, zero), b.terms.get(k, zero), rtol=tol, atol=tol) for k in keys)
