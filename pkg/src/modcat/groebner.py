"""Degree-capped Buchberger engine and the factor-extend-rerun saturation loop.

The basis computation processes only S-pairs whose lcm total degree stays
within a cap, mirroring a degree-limited Groebner run in a big CAS.  The
saturation loop alternates basis computation with division of known-nonzero
atoms out of basis elements, adjoining the cofactors as new relations, and
classifies how each run ends (unit ideal, forbidden relation, case
reduction, or stall).

Engine internals pack exponent vectors into single integers (16-bit fields
plus a total-degree field) so monomial multiplication, division and order
comparison are a handful of machine-int operations; coefficients are kept
as primitive integers with fraction-free reduction.  The public surface
speaks Poly.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction

from .poly import (Poly, RegistryMismatch, VarRegistry, exact_div, mon_deg,
                   mon_div, mon_mul, parse_poly, poly_reduce)

_W = 16                      # bits per packed exponent field
_FMAX = (1 << (_W - 1)) - 1  # largest exponent a field may carry

try:                         # C-speed rationals when available
    from gmpy2 import mpq as _QQ
except ImportError:          # pragma: no cover
    _QQ = Fraction


class ResourceBudgetExceeded(RuntimeError):
    """Raised when a basis run exceeds its configured pair budget."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class _Ring:
    """Packed-monomial workspace for one registry."""

    def __init__(self, reg):
        self.reg = reg
        self.n = n = len(reg.names)
        self.degshift = _W * n
        self.guards = 0
        for i in range(n + 1):
            self.guards |= 1 << (_W * i + _W - 1)
        self._keys = {}
        self._sups = {}
        self.zero = 0

    def pack(self, mon):
        m = 0
        deg = 0
        for i, e in enumerate(mon):
            if e > _FMAX:
                raise OverflowError("exponent too large to pack")
            m |= e << (_W * i)
            deg += e
        return m | (deg << self.degshift)

    def unpack(self, m):
        mask = (1 << _W) - 1
        return tuple((m >> (_W * i)) & mask for i in range(self.n))

    def deg(self, m):
        return m >> self.degshift

    def key(self, m):
        """Integer order key: bigger key = bigger monomial."""
        k = self._keys.get(m)
        if k is None:
            exps = self.unpack(m)
            if self.reg.order == "grevlex":
                k = self.deg(m)
                for e in exps:          # later variables more significant
                    k = (k << _W) | (_FMAX - e)
            else:
                k = 0
                for e in reversed(exps):
                    k = (k << _W) | e
            self._keys[m] = k
        return k

    def support(self, m):
        s = self._sups.get(m)
        if s is None:
            s = 0
            for i, e in enumerate(self.unpack(m)):
                if e:
                    s |= 1 << i
            self._sups[m] = s
        return s

    def lcm(self, a, b):
        mask = (1 << _W) - 1
        out = 0
        deg = 0
        for i in range(self.n):
            e = max((a >> (_W * i)) & mask, (b >> (_W * i)) & mask)
            out |= e << (_W * i)
            deg += e
        return out | (deg << self.degshift)

    def to_terms(self, p):
        """Poly -> primitive integer packed-term dict."""
        if p.is_zero():
            return {}
        den = 1
        for c in p.terms.values():
            den = den * c.denominator // math.gcd(den, c.denominator)
        num = 0
        for c in p.terms.values():
            num = math.gcd(num, abs(c.numerator * (den // c.denominator)))
        d = {self.pack(m): int(c.numerator * (den // c.denominator)) // num
             for m, c in p.terms.items()}
        lead = max(d, key=self.key)
        if d[lead] < 0:
            d = {m: -v for m, v in d.items()}
        return d

    def to_poly(self, d):
        return Poly(self.reg, {self.unpack(m): Fraction(v) for m, v in d.items()})

    # -- core kernels ---------------------------------------------------

    def normal_form(self, terms, rows):
        """Full normal form of a packed term dict against basis rows
        (lead, lead_coeff, terms, support, lead_deg), fraction-free;
        result content-stripped with positive leading coefficient."""
        d = dict(terms)
        if not d:
            return d
        guards = self.guards
        degshift = self.degshift
        key = self.key
        support = self.support
        heap = [-key(m) for m in d]
        heapq.heapify(heap)
        keyinv = {-key(m): m for m in d}
        done = set()
        while heap:
            negk = heapq.heappop(heap)
            m = keyinv[negk]
            if m in done or m not in d:
                continue
            c = d[m]
            mdeg = m >> degshift
            msup = support(m)
            hit = None
            for lm, lc, gterms, gsup, gdeg in rows:
                if gdeg > mdeg or (gsup & ~msup):
                    continue
                if ((m - lm) & guards) == 0:
                    hit = (m - lm, lc, gterms)
                    break
            if hit is None:
                done.add(m)
                continue
            q, lc, gterms = hit
            g = math.gcd(c, lc)
            mult_w = lc // g
            mult_g = c // g
            if mult_w != 1:
                for k2 in d:
                    d[k2] *= mult_w
            for gm, gc in gterms.items():
                t = q + gm
                v = d.get(t, 0) - mult_g * gc
                if v:
                    if t not in d and t != m:
                        nk = -key(t)
                        keyinv[nk] = t
                        heapq.heappush(heap, nk)
                    d[t] = v
                else:
                    d.pop(t, None)
            d.pop(m, None)
        if not d:
            return d
        g = 0
        for v in d.values():
            g = math.gcd(g, v)
            if g == 1:
                break
        if g > 1:
            d = {m: v // g for m, v in d.items()}
        lead = max(d, key=key)
        if d[lead] < 0:
            d = {m: -v for m, v in d.items()}
        return d

    def spoly(self, f, fm, g, gm):
        """S-polynomial of packed dicts with known leads, fraction-free."""
        L = self.lcm(fm, gm)
        uf = L - fm
        ug = L - gm
        fc, gc = f[fm], g[gm]
        d = math.gcd(fc, gc)
        a, b = gc // d, fc // d
        out = {}
        for m, c in f.items():
            out[uf + m] = a * c
        for m, c in g.items():
            t = ug + m
            v = out.get(t, 0) - b * c
            if v:
                out[t] = v
            else:
                out.pop(t, None)
        return out


# -- public ops -----------------------------------------------------------------


def s_polynomial(f, g):
    """lcm-of-leading-terms combination canceling the leading terms."""
    f._check(g)
    if f.is_zero() or g.is_zero():
        raise ValueError("s-polynomial needs nonzero inputs")
    ring = _Ring(f.reg)
    fd = ring.to_terms(f)
    gd = ring.to_terms(g)
    out = ring.spoly(fd, max(fd, key=ring.key), gd, max(gd, key=ring.key))
    return ring.to_poly(out)


def _row(ring, d):
    lm = max(d, key=ring.key)
    return (lm, d[lm], d, ring.support(lm), ring.deg(lm))


def buchberger_capped(generators, degree_cap, *, pair_budget=600_000,
                      _info=None):
    """Inter-reduced basis closed under S-pair reduction for all pairs whose
    lcm total degree is at most the cap.

    Pairs beyond the cap are discarded (counted in ``_info`` when a dict is
    supplied).  Deterministic for a fixed generator order; raises
    ResourceBudgetExceeded when the pair budget runs out.
    """
    gens = [g for g in generators if not g.is_zero()]
    if not gens:
        return []
    reg = gens[0].reg
    for g in gens:
        if g.reg != reg:
            raise RegistryMismatch("generators use different registries")
    ring = _Ring(reg)
    key = ring.key

    G = []          # packed term dicts
    lmG = []
    rows = []       # rows shared with normal_form
    pair_heap = []  # (lcm_deg, i, j)
    alive = set()
    discarded = 0

    def gm_update(fdict):
        """Gebauer-Moeller update for a new basis element (with cap filter)."""
        nonlocal discarded
        t = len(G)
        lmf = max(fdict, key=key)
        drop = []
        for (i, j) in alive:
            lij = ring.lcm(lmG[i], lmG[j])
            if (((lij - lmf) & ring.guards) == 0
                    and lij != ring.lcm(lmG[i], lmf)
                    and lij != ring.lcm(lmG[j], lmf)):
                drop.append((i, j))
        for p in drop:
            alive.discard(p)
        lcm_groups = {}
        for i in range(t):
            lcm_groups.setdefault(ring.lcm(lmG[i], lmf), []).append(i)
        minimal = []
        for L in sorted(lcm_groups, key=key):
            if all(((L - L2) & ring.guards) != 0 for L2 in minimal):
                minimal.append(L)
        for L in minimal:
            if any(ring.lcm(lmG[i], lmf) == lmG[i] + lmf for i in lcm_groups[L]):
                continue  # coprime-leads criterion
            if ring.deg(L) > degree_cap:
                discarded += 1
                continue
            pair = (min(lcm_groups[L]), t)
            alive.add(pair)
            heapq.heappush(pair_heap, (ring.deg(L), pair[0], pair[1]))
        G.append(fdict)
        lmG.append(lmf)
        rows.append(_row(ring, fdict))

    unit_seen = False
    for g in gens:
        nf = ring.normal_form(ring.to_terms(g), rows)
        if nf:
            gm_update(nf)
            if max(nf, key=key) == 0:
                unit_seen = True
                break

    pops = 0
    while pair_heap and not unit_seen:
        deg, i, j = heapq.heappop(pair_heap)
        if (i, j) not in alive:
            continue
        alive.discard((i, j))
        pops += 1
        if pops > pair_budget:
            raise ResourceBudgetExceeded(
                "pair budget exceeded in capped Buchberger run",
                {"pairs_processed": pops, "basis_size": len(G),
                 "degree_cap": degree_cap})
        s = ring.spoly(G[i], lmG[i], G[j], lmG[j])
        nf = ring.normal_form(s, rows)
        if nf:
            gm_update(nf)
            if max(nf, key=key) == 0:
                break  # unit ideal: no point continuing

    if _info is not None:
        _info["pairs_processed"] = pops
        _info["pairs_discarded_by_cap"] = discarded
        _info["basis_size_raw"] = len(G)

    # minimalize + tail interreduce
    order = sorted(range(len(G)), key=lambda i: key(lmG[i]))
    kept = []
    for i in order:
        lm = lmG[i]
        if any(((lm - lmG[j]) & ring.guards) == 0 for j in kept):
            continue
        kept.append(i)
    if any(lmG[i] == 0 for i in kept):
        return [Poly.constant(reg, 1)]
    kept_rows = [rows[i] for i in kept]
    final = []
    for pos, i in enumerate(kept):
        others = kept_rows[:pos] + kept_rows[pos + 1:]
        red = ring.normal_form(G[i], others)
        if red:
            final.append(red)
    final.sort(key=lambda d: key(max(d, key=key)))
    return [ring.to_poly(d) for d in final]


def divide_out_atoms(f, atoms):
    """Divide every dividing atom out of f, repeatedly.

    Returns (cofactor, divided) where divided is the multiset (list) of atoms
    removed; cofactor * product(divided) = f up to a positive rational scalar
    (the cofactor is kept primitive).  A cofactor of 1 signals that f is a
    pure product of nonvanishing elements: a contradiction witness.
    """
    if f.is_zero():
        raise ValueError("cannot divide atoms out of the zero polynomial")
    reg = f.reg
    monomial_vars = set()
    poly_atoms = []
    atom_by_var = {}
    for a in atoms:
        mons = list(a.terms)
        if len(mons) == 1 and mon_deg(mons[0]) == 1:
            vi = next(i for i, e in enumerate(mons[0]) if e)
            monomial_vars.add(vi)
            atom_by_var[vi] = a
        else:
            poly_atoms.append(a)
    cof = f.primitive()
    divided = []
    changed = True
    while changed:
        changed = False
        content = None
        for m in cof.terms:
            content = m if content is None else tuple(
                min(x, y) for x, y in zip(content, m))
        if content and any(content[i] for i in monomial_vars):
            shift = tuple(e if i in monomial_vars else 0
                          for i, e in enumerate(content))
            if any(shift):
                cof = Poly(reg, {mon_div(m, shift): c
                                 for m, c in cof.terms.items()})
                for i, e in enumerate(shift):
                    if e:
                        divided.extend([atom_by_var[i]] * e)
                changed = True
        for a in poly_atoms:
            while True:
                q = exact_div(cof, a)
                if q is None:
                    break
                cof = q.primitive()
                divided.append(a)
                changed = True
    return cof.primitive(), divided


# -- ideal specification and saturation ------------------------------------------


@dataclass(frozen=True)
class IdealSpec:
    """A polynomial ideal plus the saturation bookkeeping that drives a run."""

    registry: VarRegistry
    generators: tuple
    nonzero_atoms: tuple
    degree_cap: int
    max_degree_cap: int = 12
    forbidden: tuple = ()            # relations whose derivation is absurd
    reductions: tuple = ()           # (relation, case label) transfers
    label: str = ""
    pair_budget: int = 600_000

    def __post_init__(self):
        for p in (*self.generators, *self.nonzero_atoms, *self.forbidden,
                  *(r for r, _ in self.reductions)):
            if p.reg != self.registry:
                raise RegistryMismatch("ideal parts use different registries")
        gen_deg = max((g.total_degree() for g in self.generators), default=0)
        if self.degree_cap < gen_deg:
            raise ValueError("degree cap below maximal generator degree")

    def to_json(self):
        return {
            "label": self.label,
            "variables": list(self.registry.names),
            "order": self.registry.order,
            "degree_cap": self.degree_cap,
            "max_degree_cap": self.max_degree_cap,
            "generators": [str(g) for g in self.generators],
            "nonzero_atoms": [str(a) for a in self.nonzero_atoms],
            "forbidden": [str(p) for p in self.forbidden],
            "reductions": [[str(p), lab] for p, lab in self.reductions],
        }

    @classmethod
    def from_json(cls, obj):
        reg = VarRegistry(obj["variables"], obj.get("order", "grevlex"))
        return cls(
            registry=reg,
            generators=tuple(parse_poly(reg, s) for s in obj["generators"]),
            nonzero_atoms=tuple(parse_poly(reg, s) for s in obj["nonzero_atoms"]),
            degree_cap=int(obj["degree_cap"]),
            max_degree_cap=int(obj.get("max_degree_cap", 12)),
            forbidden=tuple(parse_poly(reg, s) for s in obj.get("forbidden", [])),
            reductions=tuple((parse_poly(reg, s), lab)
                             for s, lab in obj.get("reductions", [])),
            label=obj.get("label", ""),
        )


@dataclass(frozen=True)
class SaturationRound:
    degree_cap: int
    factored: tuple     # (basis element, divided atoms, cofactor)
    added: tuple        # new relations adjoined after this round


@dataclass(frozen=True)
class SaturationTrace:
    label: str
    rounds: tuple
    outcome: str                 # "unit" | "forbidden" | "reduction" | "stalled"
    detail: str = ""             # relation / target case / diagnostics
    witness: Poly | None = None
    final_basis: tuple = ()

    def zero_factors(self):
        """All relations adjoined over the whole run (the audited multiset)."""
        out = []
        for r in self.rounds:
            out.extend(r.added)
        return out

    def to_markdown(self):
        lines = [
            "| Degree Limit | Factored Polynomials | Zero Factors Added |",
            "| --- | --- | --- |",
        ]
        for r in self.rounds:
            facs = "<br>".join(_factored_str(e, atoms, cof)
                               for e, atoms, cof in r.factored) or " "
            adds = "<br>".join(str(a) for a in r.added) or " "
            lines.append(f"| {r.degree_cap} | {facs} | {adds} |")
        lines.append("")
        lines.append(f"Outcome: **{self.outcome}**"
                     + (f" ({self.detail})" if self.detail else ""))
        return "\n".join(lines)

    def to_json(self):
        return {
            "label": self.label,
            "outcome": self.outcome,
            "detail": self.detail,
            "rounds": [
                {
                    "degree_cap": r.degree_cap,
                    "factored": [
                        {"element": str(e),
                         "atoms": [str(a) for a in atoms],
                         "cofactor": str(c)}
                        for e, atoms, c in r.factored
                    ],
                    "added": [str(a) for a in r.added],
                }
                for r in self.rounds
            ],
            "zero_factors": [str(z) for z in self.zero_factors()],
            "final_basis": [str(b) for b in self.final_basis],
        }


def _factored_str(element, atoms, cof):
    if not atoms:
        return str(element)
    parts = []
    seen = {}
    for a in atoms:
        k = str(a)
        seen.setdefault(k, [a, 0])[1] += 1
    for s, (a, mult) in seen.items():
        body = f"({s})" if len(a.terms) > 1 else s
        parts.append(body if mult == 1 else f"{body}^{mult}")
    cstr = str(cof)
    if cof.as_constant() is None:
        cstr = f"({cstr})"
    return "*".join(parts) + "*" + cstr


def _substitution_map(spec):
    """Extract variable renames from linear generators of the forms a - b and
    a - 1 (the degeneracy-case equalities), resolved transitively.

    Returns (subs dict name -> Poly over the reduced registry, reduced
    registry) or None when no substitution applies.  Substituted generators
    vanish when mapped, so the caller can map the whole generator list.
    """
    reg = spec.registry
    target = {}   # var name -> var name | 1
    for g in spec.generators:
        if g.total_degree() != 1 or len(g.terms) != 2:
            continue
        mons = sorted(g.terms, key=reg.mon_key, reverse=True)
        lead, tail = mons
        if g.terms[lead] not in (1, -1) or mon_deg(lead) != 1:
            continue
        tc = g.terms[tail] / g.terms[lead]
        if tc != -1:
            continue
        vi = next(i for i, e in enumerate(lead) if e)
        name = reg.names[vi]
        if name in target:
            continue
        if mon_deg(tail) == 0:
            target[name] = 1
        elif mon_deg(tail) == 1:
            vj = next(i for i, e in enumerate(tail) if e)
            target[name] = reg.names[vj]
    if not target:
        return None

    def resolve(name):
        chain = [name]
        cur = name
        while cur in target:
            nxt = target[cur]
            if nxt == 1:
                return 1
            if nxt in chain:
                return nxt  # cycle: keep the representative
            chain.append(nxt)
            cur = nxt
        return cur

    resolved = {}
    for name in target:
        r = resolve(name)
        if r != name:
            resolved[name] = r
    if not resolved:
        return None
    keep = [n for n in reg.names if n not in resolved]
    sub_reg = VarRegistry(keep, reg.order)
    subs = {}
    for n in reg.names:
        r = resolved.get(n, n)
        if r == 1:
            subs[n] = Poly.constant(sub_reg, 1)
        else:
            subs[n] = Poly.variable(sub_reg, r)
    return subs, sub_reg


def _apply_subs(p, subs, sub_reg):
    vals = {n: subs[n] for n in p.variables()}
    if not vals:
        return Poly.constant(sub_reg, p.as_constant())
    r = p.evaluate(vals)
    if isinstance(r, Fraction):
        r = Poly.constant(sub_reg, r)
    return r


def _embed_back(p, reg):
    """Rewrite a polynomial from a sub-registry into the full registry."""
    if isinstance(p, Poly) and p.reg == reg:
        return p
    idx = [reg.index(n) for n in p.reg.names]
    out = {}
    nfull = len(reg.names)
    for m, c in p.terms.items():
        mm = [0] * nfull
        for i, e in zip(idx, m):
            mm[i] = e
        out[tuple(mm)] = c
    return Poly(reg, out)


def _canon(p):
    return p.primitive()


def saturation_loop(spec, *, max_rounds=40, presubstitute=True):
    """Alternate capped basis computation and atom saturation until the run
    classifies as unit / forbidden / reduction, or stalls at the cap ceiling.

    ``presubstitute`` folds pure variable renames (the degeneracy-case
    equalities th_i - th_j / th_i - 1) into the ring before computing, an
    algebra-preserving change of variables; every reported polynomial is
    embedded back into the spec's registry.
    """
    reg = spec.registry
    work_reg = reg
    gens = [_canon(g) for g in spec.generators if not g.is_zero()]
    atoms = [_canon(a) for a in spec.nonzero_atoms]
    forb = [_canon(p) for p in spec.forbidden]
    reds = [(_canon(p), lab) for p, lab in spec.reductions]

    if presubstitute:
        sub = _substitution_map(spec)
        if sub is not None:
            subs, work_reg = sub
            gens = [_canon(_apply_subs(g, subs, work_reg))
                    for g in spec.generators]
            gens = [g for g in gens if not g.is_zero()]
            atoms = []
            seen_a = set()
            for a in spec.nonzero_atoms:
                aa = _canon(_apply_subs(a, subs, work_reg))
                if aa.as_constant() is None and aa not in seen_a:
                    atoms.append(aa)
                    seen_a.add(aa)
            forb = [_canon(_apply_subs(p, subs, work_reg)) for p in spec.forbidden]
            reds = [(_canon(_apply_subs(p, subs, work_reg)), lab)
                    for p, lab in spec.reductions]

    seen = set(gens)
    cap = spec.degree_cap
    rounds = []

    def back(p):
        return _embed_back(p, reg)

    def finish(outcome, detail="", witness=None, basis=()):
        return SaturationTrace(spec.label, tuple(rounds), outcome, detail,
                               back(witness) if witness is not None else None,
                               tuple(back(b) for b in basis))

    for _ in range(max_rounds):
        basis = buchberger_capped(gens, cap, pair_budget=spec.pair_budget)
        if len(basis) == 1 and basis[0].as_constant() is not None:
            rounds.append(SaturationRound(cap, ((back(basis[0]), (), back(basis[0])),), ()))
            return finish("unit", "basis contains 1", basis[0], basis)
        for p in forb:
            if poly_reduce(p, basis).is_zero():
                rounds.append(SaturationRound(cap, (), ()))
                return finish("forbidden", str(back(p)), p, basis)
        for p, lab in reds:
            if poly_reduce(p, basis).is_zero():
                rounds.append(SaturationRound(cap, (), ()))
                return finish("reduction", lab, p, basis)

        factored = []
        added = []
        for b in basis:
            cof, divided = divide_out_atoms(b, atoms)
            if not divided:
                continue
            rec = (back(b), tuple(back(a) for a in divided), back(cof))
            if cof.as_constant() is not None:
                factored.append(rec)
                rounds.append(SaturationRound(cap, tuple(factored),
                                              tuple(back(a) for a in added)))
                return finish("unit", "atom product lies in the ideal", b, basis)
            if any(cof == f or cof == -f for f in forb):
                factored.append(rec)
                rounds.append(SaturationRound(cap, tuple(factored),
                                              tuple(back(a) for a in added)))
                return finish("forbidden", str(back(cof)), b, basis)
            hit = next((lab for r, lab in reds if cof == r or cof == -r), None)
            if hit is not None:
                factored.append(rec)
                rounds.append(SaturationRound(cap, tuple(factored),
                                              tuple(back(a) for a in added)))
                return finish("reduction", hit, b, basis)
            if cof in seen or poly_reduce(cof, basis).is_zero():
                continue
            factored.append(rec)
            added.append(cof)
            seen.add(cof)
        rounds.append(SaturationRound(cap, tuple(factored),
                                      tuple(back(a) for a in added)))
        if added:
            gens = gens + added
            continue
        if cap < spec.max_degree_cap:
            cap += 1
            continue
        return finish("stalled", f"no new relations at cap {cap}", None, basis)
    return finish("stalled", "round limit reached", None, ())
