"""Truncated mode models: free boson, vacuum Virasoro module, and the
weight-(1,0) ghost pair.

A Model carries a graded basis cut at total weight <= n_energy, sparse mode
matrices for each generating field, the three special-conformal generators,
and (for involutive models) the invariant Hermitian form and the antiunitary
involution theta.  Mode matrices are compressed to the energy ball; the
squared coefficient mass each mode would send above the cutoff is recorded
per basis column so applications can report a leakage estimate.

Words of smeared fields can alternatively be applied symbolically, letting
intermediate states live up to a working weight cutoff above n_energy; single
modes then act out to the full Fourier window, which is what makes mode-tail
residuals (e.g. locality commutators) shrink with the window size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateForm, NoFormError

GRAM_DEGENERACY_RTOL = 1e-8


def partitions(total, max_part=None, min_part=1):
    """Partitions of `total` as descending tuples with parts in [min_part, max_part]."""
    max_part = total if max_part is None else min(max_part, total)
    if total == 0:
        yield ()
        return
    if total < min_part:
        return
    for first in range(max_part, min_part - 1, -1):
        for rest in partitions(total - first, first, min_part):
            yield (first,) + rest


@dataclass(frozen=True)
class FieldSpec:
    tag: str
    dim: int  # conformal dimension d >= 0


class GradedVector:
    """Coefficient vector over a model's truncated graded basis."""

    def __init__(self, model: "Model", coeffs):
        self.model = model
        self.coeffs = np.asarray(coeffs, dtype=complex)

    def copy(self):
        return GradedVector(self.model, self.coeffs.copy())

    def __add__(self, other):
        return GradedVector(self.model, self.coeffs + other.coeffs)

    def __sub__(self, other):
        return GradedVector(self.model, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return GradedVector(self.model, complex(scalar) * self.coeffs)

    __rmul__ = __mul__

    def coeff_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def form_norm(self) -> float:
        """sqrt(|<v, v>|); a seminorm for indefinite forms."""
        return math.sqrt(abs(self.model.pair(self, self)))

    def theta(self) -> "GradedVector":
        return GradedVector(self.model, self.model.theta_coeffs(self.coeffs))

    def __repr__(self):
        return f"GradedVector({self.model.name}, |coeffs|={self.coeff_norm():.3e})"


class Model:
    """Shared machinery; concrete models fill in basis and mode rules."""

    has_form = False
    unitary = False

    def __init__(self, name: str, n_energy: int):
        self.name = name
        self.n_energy = n_energy
        self.fields: dict[str, FieldSpec] = {}
        self.keys: list = []
        self.index: dict = {}
        self.weights: np.ndarray = np.zeros(0, dtype=int)
        self.gram = None
        self.theta_signs = None
        self.gram_level_min_sv: dict[int, float] = {}
        self._mode_cache: dict = {}
        self._sl2 = None

    # -- basis plumbing ------------------------------------------------------

    def _install_basis(self, keys_with_weights):
        ordered = sorted(keys_with_weights, key=lambda kw: (kw[1], kw[0]))
        self.keys = [k for k, _ in ordered]
        self.index = {k: i for i, (k, _) in enumerate(ordered)}
        self.weights = np.array([w for _, w in ordered], dtype=int)

    @property
    def dim(self) -> int:
        return len(self.keys)

    def vacuum(self) -> GradedVector:
        coeffs = np.zeros(self.dim, dtype=complex)
        coeffs[self.index[self.vacuum_key()]] = 1.0
        return GradedVector(self, coeffs)

    def vacuum_key(self):
        raise NotImplementedError

    def key_weight(self, key) -> int:
        raise NotImplementedError

    def level_indices(self, w: int) -> np.ndarray:
        return np.nonzero(self.weights == w)[0]

    # -- modes ----------------------------------------------------------------

    def apply_mode_symbolic(self, tag: str, n: int, key) -> list:
        """Exact action of mode n of the tagged field on one basis monomial,
        as [(key, coeff)] without any weight cutoff."""
        raise NotImplementedError

    def mode_matrix(self, tag: str, n: int) -> sp.csr_matrix:
        return self._mode_pair(tag, n)[0]

    def mode_leak_col(self, tag: str, n: int) -> np.ndarray:
        return self._mode_pair(tag, n)[1]

    def _mode_pair(self, tag, n):
        cache_key = (tag, n)
        if cache_key not in self._mode_cache:
            rows, cols, vals = [], [], []
            leak = np.zeros(self.dim)
            if abs(n) <= self.n_energy:
                for j, key in enumerate(self.keys):
                    for out_key, coeff in self.apply_mode_symbolic(tag, n, key):
                        i = self.index.get(out_key)
                        if i is None:
                            leak[j] += abs(coeff) ** 2
                        else:
                            rows.append(i)
                            cols.append(j)
                            vals.append(coeff)
            mat = sp.csr_matrix(
                (np.array(vals, dtype=complex), (rows, cols)),
                shape=(self.dim, self.dim),
            )
            self._mode_cache[cache_key] = (mat, leak)
        return self._mode_cache[cache_key]

    # -- form and involution ---------------------------------------------------

    def pair(self, u: GradedVector, v: GradedVector) -> complex:
        """<u, v>: linear in u, conjugate-linear in v."""
        if self.gram is None:
            raise NoFormError(f"model {self.name} carries no invariant form")
        return complex(np.vdot(v.coeffs, self.gram @ u.coeffs))

    def theta_coeffs(self, coeffs: np.ndarray) -> np.ndarray:
        if self.theta_signs is None:
            raise NoFormError(f"model {self.name} carries no involution")
        return self.theta_signs * np.conj(coeffs)

    def _check_gram_levels(self, rtol=GRAM_DEGENERACY_RTOL, c_label=None):
        for w in range(self.n_energy + 1):
            idx = self.level_indices(w)
            if len(idx) == 0:
                continue
            block = self.gram[np.ix_(idx, idx)]
            svs = np.linalg.svd(block, compute_uv=False)
            self.gram_level_min_sv[w] = float(svs[-1])
            if svs[-1] < rtol * max(1.0, svs[0]):
                raise DegenerateForm(c_label, w, svs[-1])

    def min_gram_singular_value(self) -> float:
        return min(self.gram_level_min_sv.values())

    # -- special conformal generators ------------------------------------------

    def _build_sl2(self):
        raise NotImplementedError

    @property
    def sl2(self):
        """(L_minus, L_zero, L_plus) on the truncation."""
        if self._sl2 is None:
            self._sl2 = self._build_sl2()
        return self._sl2

    def dilation_generator(self) -> sp.csr_matrix:
        """Generator K with U(v_t) = exp(t K); K = (L_{-1} - L_{+1}) / 2.

        The sign is pinned by the covariance calibration test: the wrong sign
        makes the covariance residual O(1) instead of decaying.
        """
        l_minus, _, l_plus = self.sl2
        return ((l_minus - l_plus) * 0.5).tocsr()

    def __repr__(self):
        return f"{type(self).__name__}({self.name}, n_energy={self.n_energy}, dim={self.dim})"


# ---------------------------------------------------------------------------
# free boson
# ---------------------------------------------------------------------------


class HeisenbergModel(Model):
    """Charge-zero free boson: current modes a_m with [a_m, a_n] = m delta.

    Basis: partition monomials (creation parts, descending) over the vacuum,
    total weight <= n_energy.  The form is the standard positive-definite
    contravariant one; theta flips the sign of every creation mode.
    """

    has_form = True
    unitary = True

    def __init__(self, n_energy: int):
        super().__init__("heisenberg", n_energy)
        self.fields["J"] = FieldSpec("J", 1)
        keys = []
        for w in range(n_energy + 1):
            for p in partitions(w):
                keys.append((p, w))
        self._install_basis(keys)
        self.gram = np.diag([self.monomial_norm_sq(k) for k in self.keys]).astype(complex)
        self.theta_signs = np.array([(-1.0) ** len(k) for k in self.keys])
        self._check_gram_levels(c_label="heisenberg")

    def vacuum_key(self):
        return ()

    def key_weight(self, key):
        return sum(key)

    @staticmethod
    def monomial_norm_sq(parts) -> float:
        out = 1.0
        for r in set(parts):
            m = parts.count(r)
            out *= (r ** m) * math.factorial(m)
        return out

    def apply_mode_symbolic(self, tag, n, key):
        if tag != "J":
            raise KeyError(tag)
        if n == 0:
            return []
        if n < 0:
            return [(tuple(sorted(key + (-n,), reverse=True)), 1.0)]
        mult = key.count(n)
        if mult == 0:
            return []
        out = list(key)
        out.remove(n)
        return [(tuple(out), float(n * mult))]

    def symbolic_norm_sq(self, state_dict) -> float:
        return sum(abs(c) ** 2 * self.monomial_norm_sq(k) for k, c in state_dict.items())

    def _build_sl2(self):
        n = self.n_energy
        l_zero = sp.diags(self.weights.astype(complex)).tocsr()
        l_plus = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        l_minus = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for k in range(1, n + 1):
            # lowering factor applied first keeps the compressed product exact
            l_plus = l_plus + self.mode_matrix("J", -(k - 1) or 0) @ self.mode_matrix("J", k + 0) if False else l_plus
        # L_{+1} = sum_{k>=2} a_{1-k} a_k  (charge zero: the a_0 a_1 term drops)
        l_plus = sum(
            (self.mode_matrix("J", 1 - k) @ self.mode_matrix("J", k) for k in range(2, n + 2)),
            sp.csr_matrix((self.dim, self.dim), dtype=complex),
        )
        # L_{-1} = sum_{k>=1} a_{-k-1} a_k
        l_minus = sum(
            (self.mode_matrix("J", -k - 1) @ self.mode_matrix("J", k) for k in range(1, n + 1)),
            sp.csr_matrix((self.dim, self.dim), dtype=complex),
        )
        return l_minus.tocsr(), l_zero, l_plus.tocsr()


# ---------------------------------------------------------------------------
# Virasoro vacuum module
# ---------------------------------------------------------------------------


def virasoro_apply(m: int, parts: tuple, c, cache=None):
    """Exact action of L_m on a PBW monomial L_{-n1}...L_{-nk}|0> (parts desc,
    all >= 2) in the vacuum module, as {parts: coeff}.

    Number-type agnostic in c: floats give the working model, Fractions give
    the exact cross-check.
    """
    if cache is not None:
        hit = cache.get((m, parts))
        if hit is not None:
            return hit
    if not parts:
        if m <= -2:
            out = {(-m,): c * 0 + 1}
        else:
            out = {}
    elif m <= -parts[0]:
        out = {(-m,) + parts: c * 0 + 1}
    else:
        head, rest = parts[0], parts[1:]
        out = {}
        # L_m L_{-head} = L_{-head} L_m + (m + head) L_{m-head} + central
        inner = virasoro_apply(m, rest, c, cache)
        for key, coeff in inner.items():
            for key2, coeff2 in virasoro_apply(-head, key, c, cache).items():
                out[key2] = out.get(key2, 0) + coeff * coeff2
        for key, coeff in virasoro_apply(m - head, rest, c, cache).items():
            out[key] = out.get(key, 0) + (m + head) * coeff
        if m == head:
            central = c * ((m ** 3 - m) / 12.0 if not isinstance(c, Fraction)
                           else Fraction(m ** 3 - m, 12))
            for key, coeff in ({rest: 1} if True else {}).items():
                out[key] = out.get(key, 0) + central * coeff
        out = {k: v for k, v in out.items() if v != 0}
    if cache is not None:
        cache[(m, parts)] = out
    return out


def virasoro_gram_entry(left: tuple, right: tuple, c, cache=None):
    """<monomial(left), monomial(right)> by peeling raising modes onto `right`."""
    state = {right: c * 0 + 1}
    for n in left:
        new = {}
        for key, coeff in state.items():
            for key2, coeff2 in virasoro_apply(n, key, c, cache).items():
                new[key2] = new.get(key2, 0) + coeff * coeff2
        state = new
        if not state:
            return c * 0
    return state.get((), c * 0)


class VirasoroModel(Model):
    """Vacuum module at central parameter c, parts >= 2, weight <= n_energy.

    The contravariant form is assembled by exact commutator pushing.  If the
    form is degenerate at some level (a null vector), the build fails with
    DegenerateForm unless quotient_radical=True, in which case the model is
    the quotient by the radical: per level an orthonormal basis of the range
    of the Gram block, with modes conjugated accordingly (exact because the
    radical is invariant under every L_m).
    """

    has_form = True

    def __init__(self, c: float, n_energy: int, quotient_radical: bool = False,
                 degeneracy_rtol: float = GRAM_DEGENERACY_RTOL):
        super().__init__(f"virasoro(c={c})", n_energy)
        self.c = float(c)
        self.fields["T"] = FieldSpec("T", 2)
        self._vir_cache = {}
        self.quotient = quotient_radical
        monomials = []
        for w in range(n_energy + 1):
            for p in partitions(w, min_part=2):
                monomials.append((p, w))
        monomials.sort(key=lambda kw: (kw[1], kw[0]))
        self._monomials = [k for k, _ in monomials]
        self._mono_index = {k: i for i, (k, _) in enumerate(monomials)}
        self._mono_weights = np.array([w for _, w in monomials], dtype=int)

        # exact Gram in the monomial basis (real symmetric for real c)
        nmono = len(self._monomials)
        gram_mono = np.zeros((nmono, nmono))
        for w in range(n_energy + 1):
            idx = np.nonzero(self._mono_weights == w)[0]
            for a in idx:
                for b in idx:
                    if b < a:
                        continue
                    val = virasoro_gram_entry(
                        self._monomials[a], self._monomials[b], self.c, self._vir_cache
                    )
                    gram_mono[a, b] = gram_mono[b, a] = float(val)
        self._gram_mono = gram_mono

        if not quotient_radical:
            self._level_maps = None
            keys = [(k, int(w)) for k, w in zip(self._monomials, self._mono_weights)]
            self._install_basis(keys)
            # identity transport from monomial order to installed order
            perm = np.array([self._mono_index[k] for k in self.keys])
            self.gram = gram_mono[np.ix_(perm, perm)].astype(complex)
            self._mono_to_basis = perm
            self.theta_signs = np.ones(self.dim)
            self._check_gram_levels(rtol=degeneracy_rtol, c_label=self.c)
        else:
            # per-level quotient by the Gram radical
            self._level_maps = {}
            keys = []
            for w in range(n_energy + 1):
                idx = np.nonzero(self._mono_weights == w)[0]
                if len(idx) == 0:
                    continue
                block = gram_mono[np.ix_(idx, idx)]
                evals, evecs = np.linalg.eigh(block)
                keep = np.abs(evals) > degeneracy_rtol * max(1.0, np.max(np.abs(evals)))
                u = evecs[:, keep]  # real orthonormal columns spanning range(G)
                self._level_maps[w] = (idx, u)
                for r in range(u.shape[1]):
                    keys.append(((w, r), w))
            self._install_basis(keys)
            dim = self.dim
            self.gram = np.zeros((dim, dim), dtype=complex)
            for w, (idx, u) in self._level_maps.items():
                rows = [self.index[(w, r)] for r in range(u.shape[1])]
                block = u.T @ gram_mono[np.ix_(idx, idx)] @ u
                self.gram[np.ix_(rows, rows)] = block
            self.theta_signs = np.ones(self.dim)
            self._check_gram_levels(rtol=degeneracy_rtol, c_label=self.c)

    def vacuum_key(self):
        return () if self._level_maps is None else (0, 0)

    def key_weight(self, key):
        return sum(key) if self._level_maps is None else key[0]

    def _apply_mono(self, n, mono):
        return virasoro_apply(n, mono, self.c, self._vir_cache)

    def apply_mode_symbolic(self, tag, n, key):
        if tag != "T":
            raise KeyError(tag)
        if self._level_maps is None:
            return [(k, complex(v)) for k, v in self._apply_mono(n, key).items()]
        # quotient model: lift, act, re-project level by level
        w, r = key
        idx, u = self._level_maps[w]
        out = {}
        for mono_pos, amp in zip(idx, u[:, r]):
            if amp == 0.0:
                continue
            for mono_out, coeff in self._apply_mono(n, self._monomials[mono_pos]).items():
                out[mono_out] = out.get(mono_out, 0.0) + amp * complex(coeff)
        w_out = w - 0 + (-n)
        result = []
        if w_out in self._level_maps:
            idx_t, u_t = self._level_maps[w_out]
            vec = np.array([out.get(self._monomials[p], 0.0) for p in idx_t], dtype=complex)
            proj = u_t.T @ vec
            for rr, val in enumerate(proj):
                if val != 0.0:
                    result.append(((w_out, rr), complex(val)))
        else:
            # above the cutoff: return raw monomials so leakage is counted
            for mono_out, coeff in out.items():
                if sum(mono_out) > self.n_energy:
                    result.append((("leak", mono_out), complex(coeff)))
        return result

    def symbolic_norm_sq(self, state_dict) -> float:
        total = 0.0
        for k1, c1 in state_dict.items():
            for k2, c2 in state_dict.items():
                if isinstance(k1, tuple) and isinstance(k2, tuple) and \
                        not isinstance(k1[0], str) and not isinstance(k2[0], str):
                    if sum(k1) != sum(k2):
                        continue
                    g = float(virasoro_gram_entry(k1, k2, self.c, self._vir_cache))
                    total += (c1 * np.conj(c2) * g).real
        return abs(total)

    def _build_sl2(self):
        return (self.mode_matrix("T", -1), self.mode_matrix("T", 0),
                self.mode_matrix("T", 1))


# ---------------------------------------------------------------------------
# weight-(1, 0) ghost pair
# ---------------------------------------------------------------------------


def _bounded_multisets(max_total, min_part, max_len):
    """Multisets (descending tuples) with parts >= min_part, sum <= max_total,
    length <= max_len."""
    out = [()]
    frontier = [()]
    while frontier:
        new_frontier = []
        for ms in frontier:
            if len(ms) >= max_len:
                continue
            smallest = ms[-1] if ms else None
            start = min_part
            for part in range(start, max_total - sum(ms) + 1):
                if smallest is not None and part > smallest:
                    continue
                cand = ms + (part,)
                new_frontier.append(cand)
                out.append(cand)
        frontier = new_frontier
    return out


class GhostModel(Model):
    """Bosonic ghost pair of weights (1, 0) with [b_m, g_n] = delta_{m+n,0}.

    The weight-zero mode g_0 acts freely, so weight spaces are infinite
    dimensional; the basis is doubly truncated by total weight <= n_energy
    and |#g - #b| <= charge_cutoff.  Form-free: no gram, no theta; residuals
    for this model are coefficient-norm diagnostics only.
    """

    has_form = False

    def __init__(self, n_energy: int, charge_cutoff: int):
        super().__init__("bg_ghost", n_energy)
        self.charge_cutoff = charge_cutoff
        self.fields["beta"] = FieldSpec("beta", 1)
        self.fields["gamma"] = FieldSpec("gamma", 0)
        keys = []
        for bparts in _bounded_multisets(n_energy, 1, n_energy):
            wb = sum(bparts)
            max_g_len = charge_cutoff + len(bparts)
            for gparts in _bounded_multisets(n_energy - wb, 0, max_g_len):
                if abs(len(gparts) - len(bparts)) > charge_cutoff:
                    continue
                keys.append(((bparts, gparts), wb + sum(gparts)))
        self._install_basis(keys)

    def vacuum_key(self):
        return ((), ())

    def key_weight(self, key):
        return sum(key[0]) + sum(key[1])

    def _within_charge(self, bparts, gparts):
        return abs(len(gparts) - len(bparts)) <= self.charge_cutoff

    def apply_mode_symbolic(self, tag, n, key):
        bparts, gparts = key
        if tag == "beta":
            if n < 0:
                new = (tuple(sorted(bparts + (-n,), reverse=True)), gparts)
                return [(new, 1.0)] if self._within_charge(*new) else [((("leak",) + new), 1.0)]
            mult = gparts.count(n)
            if mult == 0:
                return []
            g = list(gparts)
            g.remove(n)
            return [((bparts, tuple(g)), float(mult))]
        if tag == "gamma":
            if n <= 0:
                new = (bparts, tuple(sorted(gparts + (-n,), reverse=True)))
                return [(new, 1.0)] if self._within_charge(*new) else [((("leak",) + new), 1.0)]
            mult = bparts.count(n)
            if mult == 0:
                return []
            b = list(bparts)
            b.remove(n)
            return [((tuple(b), gparts), float(-mult))]
        raise KeyError(tag)

    def symbolic_norm_sq(self, state_dict) -> float:
        # form-free model: plain coefficient mass
        return sum(abs(c) ** 2 for c in state_dict.values())

    def _build_sl2(self):
        return (self._ghost_l(-1), self._ghost_l(0), self._ghost_l(1))

    def _ghost_l(self, m):
        """L_m = sum_k (-k) :b_{m-k} g_k: with annihilators applied first."""
        n = self.n_energy
        total = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for k in range(-n, n + 1):
            if k == 0 or abs(m - k) > n:
                continue
            b = self.mode_matrix("beta", m - k)
            g = self.mode_matrix("gamma", k)
            term = (b @ g) if k >= 1 else (g @ b)
            total = total + (-k) * term
        return total.tocsr()
