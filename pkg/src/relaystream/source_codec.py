"""First-hop code: diagonal interleaving, and the relay-side estimate ledger.

Layout.  Each message s_t has k_src = k' * l' symbols over GF(q), split into
l' layers of k' symbols (layer c owns the flat indices [c*k', (c+1)*k')).
Layer c is protected by a systematic (n', k') MDS code applied along
diagonals: the codeword that starts at time u places position p at time u+p,
so the source packet at time t carries, per layer, the k' systematic symbols
of s_t verbatim followed by N1 parity rows, where parity row m at time t
combines s_{t-k'-m}[c, 0], ..., s_{t-m-1}[c, k'-1].

Estimates.  When x_t is erased on the first hop, the relay rebuilds s_t one
position per layer at a time: the v-th nonerased slot after t lets it isolate
position p = k'-v (0-based) of every layer, by combining the received parity
rows of p's diagonal so that all later-position unknowns cancel and p keeps
coefficient 1 (every square submatrix of a systematic-MDS parity block is
nonsingular, so the combination always exists).  Unknown earlier-position
symbols remain embedded in the estimate; they belong to strictly older
messages and are recorded as interference so the destination can cancel them
after decoding those messages.  Terms whose message the relay has already
fully recovered are cancelled immediately and never recorded.

Everything structural here (which positions are emitted when, what
interference they carry) is a pure function of the erasure pattern, which is
what lets the destination replay the relay's bookkeeping symbolically.
"""

from __future__ import annotations

from dataclasses import dataclass

from .field_mds import GaloisField, MdsCode, DimensionMismatch, make_field, make_mds, solve_linear
from .scheme_params import SchemeParams, derive_dims, implemented_field_size, nominal_field_size


class OutOfOrder(ValueError):
    """Ledger ingest called with a non-consecutive slot index."""


# ---------------------------------------------------------------------------
# code construction


def make_codes(p: SchemeParams) -> tuple[GaloisField, MdsCode]:
    """Field and first-hop (n', k') layer code for a parameter set."""
    d = derive_dims(p)
    q = implemented_field_size(p)
    # the construction promises a field at least as large as every code length
    assert nominal_field_size(p) >= max(d.n_prime, d.n_dprime, p.T + 1 - p.N1)
    field = make_field(q)
    return field, make_mds(field, d.n_prime, d.k_prime)


@dataclass(frozen=True)
class SourcePacket:
    """One first-hop packet: l' rows of n' symbols (systematic | parity)."""

    t: int
    rows: tuple[tuple[int, ...], ...]

    def symbols(self) -> list[int]:
        return [s for row in self.rows for s in row]


def encode_source(p: SchemeParams, history: list[list[int]]) -> SourcePacket:
    """Packet for time t = len(history)-1; history[i] is message s_i.

    Messages before time 0 are implicitly all-zero.
    """
    d = derive_dims(p)
    field, code = _codes_cached(p)
    if not history:
        raise DimensionMismatch("history must contain at least the current message")
    t = len(history) - 1
    for i, msg in enumerate(history):
        if len(msg) != d.k_src:
            raise DimensionMismatch(f"message {i} has {len(msg)} symbols, expected {d.k_src}")

    def sym(time: int, layer: int, pos: int) -> int:
        if time < 0:
            return 0
        return history[time][layer * d.k_prime + pos]

    rows = []
    for c in range(d.l_prime):
        row = [sym(t, c, pos) for pos in range(d.k_prime)]
        for m in range(p.N1):
            acc = 0
            for pos in range(d.k_prime):
                v = sym(t - d.k_prime - m + pos, c, pos)
                if v:
                    acc = field.add(acc, field.mul(code.parity[pos][m], v))
            row.append(acc)
        rows.append(tuple(row))
    return SourcePacket(t, tuple(rows))


_CODE_CACHE: dict[SchemeParams, tuple[GaloisField, MdsCode]] = {}


def _codes_cached(p: SchemeParams) -> tuple[GaloisField, MdsCode]:
    got = _CODE_CACHE.get(p)
    if got is None:
        got = make_codes(p)
        _CODE_CACHE[p] = got
    return got


# ---------------------------------------------------------------------------
# pattern-level emission structure (no symbol values involved)


@dataclass(frozen=True)
class PosEmission:
    """Structure of one per-layer estimate: position ``pos`` of message t.

    The same combination applies to every layer, so one PosEmission expands
    into l' estimate records (flat indices c*k'+pos).
    """

    t: int
    pos: int
    slot: int
    parity_rows: tuple[int, ...]  # parity row indices m used, in arrival order
    late: tuple[int, ...]  # later positions eliminated by the combination
    interference: tuple[tuple[int, int], ...]  # (older message t', pos') kept


def _diag_parity_slots(t: int, pos: int, k_prime: int, n1_rows: int):
    """Slots carrying the parity rows of the diagonal through (t, pos)."""
    u = t - pos
    return [(u + k_prime + m, m) for m in range(n1_rows)]


def relay_recovery_slot(p: SchemeParams, erased, t: int) -> int | None:
    """First slot by which the relay knows s_t exactly (None if never).

    For a received packet that is slot t itself.  For an erased one it is the
    slot where every diagonal through the message becomes solvable: received
    parity rows must reach the number of unavailable systematic positions.  A
    systematic symbol later than the candidate slot counts as unavailable --
    the relay has not received it yet -- so this evaluates knowledge *at* each
    slot and gives the same answer whether ``erased`` reports the full pattern
    or masks unseen future slots as erased.
    """
    d = derive_dims(p)
    if not erased(t):
        return t
    worst = t
    for pos in range(d.k_prime):
        u = t - pos
        got, ready = 0, None
        for slot, _m in _diag_parity_slots(t, pos, d.k_prime, p.N1):
            if erased(slot):
                continue
            got += 1
            unknown = sum(
                1
                for q in range(d.k_prime)
                if u + q >= 0 and (u + q > slot or erased(u + q))
            )
            if got >= unknown:
                ready = slot
                break
        if ready is None:
            return None
        worst = max(worst, ready)
    return worst


def emission_schedule(p: SchemeParams, erased, t: int) -> list[PosEmission]:
    """All estimate emissions for message t, in transmission order.

    ``erased`` is a slot -> bool lookup for the first hop.  Emissions happen
    at nonerased slots in [t+1, t+T-N2]; at each such slot every position
    that just became constructible is emitted (higher positions first; on
    admissible patterns exactly one position per slot becomes ready).
    """
    if not erased(t):
        return []
    d = derive_dims(p)
    k_prime = d.k_prime
    out: list[PosEmission] = []
    emitted = [False] * k_prime
    for slot in range(t + 1, t + p.T - p.N2 + 1):
        if erased(slot):
            continue
        for pos in range(k_prime - 1, -1, -1):
            if emitted[pos]:
                continue
            u = t - pos
            late = tuple(
                q for q in range(pos + 1, k_prime) if u + q >= 0 and erased(u + q)
            )
            rows = tuple(
                m
                for s, m in _diag_parity_slots(t, pos, k_prime, p.N1)
                if s <= slot and not erased(s)
            )
            if len(rows) < len(late) + 1:
                continue
            rows = rows[: len(late) + 1]
            interference = []
            for q in range(pos):
                s_q = u + q
                if s_q < 0 or not erased(s_q):
                    continue
                ready = relay_recovery_slot(p, erased, s_q)
                if ready is None or ready > slot:
                    interference.append((s_q, q))
            out.append(PosEmission(t, pos, slot, rows, late, tuple(interference)))
            emitted[pos] = True
    return out


def emission_coefficients(
    field: GaloisField, code: MdsCode, em: PosEmission
) -> tuple[list[int], dict[int, int]]:
    """(lambda per parity row, mu per systematic position) for one emission.

    mu maps every position outside {pos}+late to its leftover coefficient in
    the combination (zero entries dropped); interference terms keep exactly
    these coefficients, known terms get subtracted with them.
    """
    P = code.parity
    cols = (em.pos,) + em.late
    system = [[P[pos][m] for m in em.parity_rows] for pos in cols]
    rhs = [1] + [0] * len(em.late)
    lam = solve_linear(field, system, rhs)
    mu: dict[int, int] = {}
    for pos in range(code.k):
        if pos in cols:
            continue
        acc = 0
        for l_coef, m in zip(lam, em.parity_rows):
            acc = field.add(acc, field.mul(l_coef, P[pos][m]))
        if acc:
            mu[pos] = acc
    return lam, mu


# ---------------------------------------------------------------------------
# value-level ledger (what the relay actually stores and forwards)


@dataclass(frozen=True)
class SymbolRecord:
    """One estimate the relay can transmit: value of s_t[flat] plus the
    interference terms still embedded in it."""

    t: int
    flat: int
    value: int
    interference: tuple[tuple[int, int, int], ...]  # (t', flat', coeff)


class EstimateLedger:
    """Relay-side ingest of the first hop: erasure tracking, packet storage,
    and eager estimate extraction with interference bookkeeping."""

    def __init__(self, p: SchemeParams):
        self.params = p
        self.dims = derive_dims(p)
        self.field, self.code = _codes_cached(p)
        self.next_slot = 0
        self.erased_bits: list[bool] = []
        self.packets: dict[int, SourcePacket] = {}
        self.records: dict[int, list[SymbolRecord]] = {}
        self.emissions: dict[int, list[PosEmission]] = {}
        self._recovered: dict[tuple[int, int], int] = {}  # (t, flat) -> value

    # -- pattern lookups ----------------------------------------------------

    def erased(self, slot: int) -> bool:
        if slot < 0:
            return False
        if slot >= len(self.erased_bits):
            return True  # not yet seen; callers never ask beyond next_slot
        return self.erased_bits[slot]

    # -- ingest ---------------------------------------------------------------

    def ingest(self, slot: int, packet: SourcePacket | None) -> None:
        if slot != self.next_slot:
            raise OutOfOrder(f"expected slot {self.next_slot}, got {slot}")
        if packet is not None and packet.t != slot:
            raise OutOfOrder(f"packet is stamped t={packet.t}, ingested at slot {slot}")
        self.erased_bits.append(packet is None)
        self.next_slot += 1
        if packet is None:
            return
        self.packets[slot] = packet
        d, p = self.dims, self.params
        lo = max(0, slot - (p.T - p.N2))
        for t in range(lo, slot):
            if not self.erased(t):
                continue
            self._extract_for(t, slot)

    def _extract_for(self, t: int, now: int) -> None:
        """Emit every estimate of erased message t constructible at slot now."""
        d, p = self.dims, self.params
        ems = self.emissions.setdefault(t, [])
        have = {em.pos for em in ems}
        for pos in range(d.k_prime - 1, -1, -1):
            if pos in have:
                continue
            em = self._try_build(t, pos, now)
            if em is None:
                continue
            ems.append(em)
            have.add(pos)
            lam, mu = emission_coefficients(self.field, self.code, em)
            interference_pos = {q for (tq, q) in em.interference}
            for c in range(d.l_prime):
                value = 0
                for l_coef, m in zip(lam, em.parity_rows):
                    u = t - pos
                    pslot = u + d.k_prime + m
                    pval = self.packets[pslot].rows[c][d.k_prime + m]
                    value = self.field.add(value, self.field.mul(l_coef, pval))
                inter: list[tuple[int, int, int]] = []
                for q, coeff in mu.items():
                    src_t = t - pos + q
                    if src_t < 0:
                        continue  # symbol is an implicit zero
                    if q in interference_pos:
                        inter.append((src_t, c * d.k_prime + q, coeff))
                    else:
                        value = self.field.sub(
                            value, self.field.mul(coeff, self._known_symbol(src_t, c, q, now))
                        )
                self.records.setdefault(t, []).append(
                    SymbolRecord(t, c * d.k_prime + pos, value, tuple(inter))
                )

    def _try_build(self, t: int, pos: int, now: int) -> PosEmission | None:
        d, p = self.dims, self.params
        if now > t + p.T - p.N2:
            return None
        u = t - pos
        late = tuple(
            q for q in range(pos + 1, d.k_prime) if u + q >= 0 and self.erased(u + q)
        )
        rows = tuple(
            m
            for s, m in _diag_parity_slots(t, pos, d.k_prime, p.N1)
            if s <= now and not self.erased(s)
        )
        if len(rows) < len(late) + 1:
            return None
        rows = rows[: len(late) + 1]
        interference = []
        for q in range(pos):
            s_q = u + q
            if s_q < 0 or not self.erased(s_q):
                continue
            ready = relay_recovery_slot(p, self.erased, s_q)
            if ready is None or ready > now:
                interference.append((s_q, q))
        return PosEmission(t, pos, now, rows, late, tuple(interference))

    # -- known symbol values --------------------------------------------------

    def _known_symbol(self, t: int, layer: int, pos: int, now: int) -> int:
        """Value of s_t[layer, pos] when the relay provably knows it."""
        if t < 0:
            return 0
        if not self.erased(t):
            return self.packets[t].rows[layer][pos]
        key = (t, layer * self.dims.k_prime + pos)
        if key not in self._recovered:
            self._recover_message(t, now)
        return self._recovered[key]

    def _recover_message(self, t: int, now: int) -> None:
        """MDS-decode every diagonal of fully-known erased message t."""
        d = self.dims
        for pos in range(d.k_prime):
            u = t - pos
            for c in range(d.l_prime):
                received: list[tuple[int, int]] = []
                for q in range(d.k_prime):
                    s_q = u + q
                    if s_q < 0:
                        received.append((q, 0))
                    elif not self.erased(s_q) and s_q <= now:
                        received.append((q, self.packets[s_q].rows[c][q]))
                for s_m, m in _diag_parity_slots(t, pos, d.k_prime, self.params.N1):
                    if 0 <= s_m <= now and not self.erased(s_m):
                        received.append((d.k_prime + m, self.packets[s_m].rows[c][d.k_prime + m]))
                word = self.code.erasure_decode(received)
                for q in range(d.k_prime):
                    s_q = u + q
                    if s_q >= 0:
                        self._recovered[(s_q, c * d.k_prime + q)] = word[q]

    # -- queries ----------------------------------------------------------------

    def records_for(self, t: int) -> list[SymbolRecord]:
        return self.records.get(t, [])

    def available_count(self, t: int, now: int) -> int:
        """Estimates of message t actually held once slot `now` was ingested."""
        if not self.erased(t):
            return self.dims.k_src if now >= t else 0
        ems = self.emissions.get(t, [])
        return self.dims.l_prime * sum(1 for em in ems if em.slot <= now)


def relay_ingest(ledger: EstimateLedger, slot: int, packet: SourcePacket | None) -> EstimateLedger:
    """Feed one first-hop slot (None = erased) into the ledger."""
    ledger.ingest(slot, packet)
    return ledger


def estimates_available(ledger: EstimateLedger, t: int, now: int) -> int:
    """Closed-form count min(k_src, l' * #nonerased in [t+1, now]) for erased
    messages (k_src once received, for nonerased).  Matches the ledger's
    actual holdings on admissible patterns."""
    d = ledger.dims
    if not ledger.erased(t):
        return d.k_src if now >= t else 0
    hi = min(now, t + ledger.params.T - ledger.params.N2)
    got = sum(1 for s in range(t + 1, hi + 1) if not ledger.erased(s))
    return min(d.k_src, d.l_prime * got)
