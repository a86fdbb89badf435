"""Second-hop code: adaptive schedules, relay packets, parity groups, header.

The relay decides per message t how many symbols to forward in each of its
slots t+j .. t+T.  Message-phase slots (up to t+T-N2) carry message symbols
or estimates; the final N2 slots carry MDS parities so the destination
survives second-hop erasures.  The whole layout is a pure function of the
first-hop erasure pattern (the "plan"), which the destination recomputes from
side information or from the packet headers.

Per-message schedule for an erased x_t, evaluated at slot t+i with i >= j
(nothing rides before slot t+j):

    gamma(i) = erasures observed in (t, t+i)          # strictly between
    ell(i)   = T+1-N2-N1   if gamma(i) <= j-1         # still near-full rate
             = T+1-N2-j    if gamma(i) >= j and i >= N1
             = 0           otherwise                  # pause, too early
    alpha(i) = min(ell(i), available - already sent)

A received x_t is forwarded at T+1-N1-N2 symbols per slot over the k''-slot
window starting at t+j.  Two parity layouts follow:

* adaptive (received, or erased with gamma(T-N2) <= j-1): per layer d, the
  slot-position symbols form a (T+1-j, T+1-N2-j) codeword whose N2 parities
  ride the last slots;
* grouped (erased, heavier early loss): the k transmitted estimates are cut
  in transmission order into l'' groups of size T+1-N2-j, and for each index
  p the p-th members of all groups form a (T+1-N1, T+1-N1-N2) codeword.

Either way each codeword never puts two symbols in one slot, so N2 erasures
cost it at most N2 symbols -- exactly what its parity budget covers.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .field_mds import MdsCode, make_mds
from .scheme_params import SchemeParams, derive_dims, header_overhead, implemented_field_size
from .source_codec import (
    EstimateLedger,
    PosEmission,
    SourcePacket,
    _codes_cached,
    emission_schedule,
)


class InadmissiblePattern(ValueError):
    """Erasure prefix violates the first-hop window bound."""


class ScheduleOverrun(ValueError):
    """Schedule asks for more symbols than the ledger holds."""


class IncompleteEstimates(ValueError):
    """Parity groups requested before all scheduled estimates exist."""


@dataclass(frozen=True)
class Schedule:
    """Per-message subpacket sizes alpha[i] for slots t+i, i in [0, T]."""

    t: int
    erased: bool
    grouped: bool
    alpha: tuple[int, ...]
    ell: tuple[int, ...]
    gamma: tuple[int, ...]

    @property
    def message_symbols(self) -> int:
        return sum(self.alpha[: len(self.gamma)])


def _schedule_core(p: SchemeParams, erased_msg: bool, erased_after, avail) -> Schedule:
    """Algorithm shared by the contract-level op and the episode plans.

    erased_after(i): whether slot t+i was erased (queried for 1 <= i <= T-N2).
    avail(i): estimates available once slot t+i arrived.
    """
    d = derive_dims(p)
    T, N1, N2, j = p.T, p.N1, p.N2, p.j
    last_msg = T - N2
    gamma, ell, alpha = [], [], []
    sent = 0
    for i in range(last_msg + 1):
        g = sum(1 for a in range(1, i) if erased_after(a))
        gamma.append(g)
        if i < j or (not erased_msg):
            # nothing rides before slot t+j; a received message then flows
            # at the steady per-slot rate
            cap = d.l_dprime if i >= j else 0
        elif g <= j - 1:
            cap = d.l_dprime
        elif i >= N1:
            cap = d.k_dprime  # == T+1-N2-j
        else:
            cap = 0
        ell.append(cap)
        a = min(cap, avail(i) - sent)
        if a < 0:
            raise ScheduleOverrun(f"negative availability at slot offset {i}")
        alpha.append(a)
        sent += a
    grouped = erased_msg and gamma[last_msg] > j - 1
    par = 0 if sent == 0 and erased_msg else (d.k_dprime if grouped else d.l_dprime)
    for i in range(last_msg + 1, T + 1):
        alpha.append(par)
        ell.append(par)
    return Schedule(0, erased_msg, grouped, tuple(alpha), tuple(ell), tuple(gamma))


def compute_schedule(p: SchemeParams, t: int, erased: bool, prefix) -> Schedule:
    """Contract-level schedule from the erasure prefix over (t, t+T-N2].

    prefix[i-1] is the erasure bit of slot t+i.  Raises InadmissiblePattern
    if the visible window [t, t+T-N2] already exceeds N1 erasures.
    """
    d = derive_dims(p)
    bits = [int(b) for b in prefix]
    if len(bits) != p.T - p.N2:
        raise InadmissiblePattern(
            f"prefix must cover (t, t+T-N2]: expected {p.T - p.N2} bits, got {len(bits)}"
        )
    if int(erased) + sum(bits) > p.N1:
        raise InadmissiblePattern(
            f"{int(erased) + sum(bits)} erasures in a {p.T - p.N2 + 1}-slot window exceed N1={p.N1}"
        )

    def erased_after(i: int) -> bool:
        return bool(bits[i - 1])

    def avail(i: int) -> int:
        if not erased:
            return d.k_src
        got = sum(1 for a in range(1, i + 1) if not erased_after(a))
        return min(d.k_src, d.l_prime * got)

    sched = _schedule_core(p, erased, erased_after, avail)
    return Schedule(t, sched.erased, sched.grouped, sched.alpha, sched.ell, sched.gamma)


# ---------------------------------------------------------------------------
# per-message transmission plan (structure only; values are filled by the
# relay, and the destination rebuilds the same structure symbolically)


@dataclass(frozen=True)
class TxItem:
    """One message-phase symbol: s_t[flat], possibly only as an estimate."""

    flat: int
    slot: int
    emission: PosEmission | None  # None for a systematically known symbol


@dataclass(frozen=True)
class CodewordSpec:
    """One second-hop MDS codeword: systematic tx items + parity positions."""

    n: int
    k: int
    sys_items: tuple[int, ...]  # indices into MessagePlan.tx
    parity_slots: tuple[tuple[int, int], ...]  # (slot, symbol index in subpacket)


@dataclass(frozen=True)
class MessagePlan:
    t: int
    erased: bool
    schedule: Schedule
    tx: tuple[TxItem, ...]
    codewords: tuple[CodewordSpec, ...]
    slot_spans: dict = dc_field(default_factory=dict, compare=False)


def build_message_plan(p: SchemeParams, erased_fn, t: int) -> MessagePlan:
    """Everything about message t's relay treatment, from the pattern alone."""
    d = derive_dims(p)
    erased_msg = bool(erased_fn(t))
    emissions = emission_schedule(p, erased_fn, t) if erased_msg else []

    def erased_after(i: int) -> bool:
        return bool(erased_fn(t + i))

    def avail(i: int) -> int:
        if not erased_msg:
            return d.k_src
        return d.l_prime * sum(1 for em in emissions if em.slot <= t + i)

    sched = _schedule_core(p, erased_msg, erased_after, avail)
    sched = Schedule(t, sched.erased, sched.grouped, sched.alpha, sched.ell, sched.gamma)

    # transmission queue in ledger order
    queue: list[tuple[int, PosEmission | None]] = []
    if erased_msg:
        for em in emissions:
            for c in range(d.l_prime):
                queue.append((c * d.k_prime + em.pos, em))
    else:
        for w in range(d.k_dprime):
            for layer in range(d.l_dprime):
                queue.append((layer * d.k_dprime + w, None))

    tx: list[TxItem] = []
    consumed = 0
    for i in range(p.T - p.N2 + 1):
        for _ in range(sched.alpha[i]):
            flat, em = queue[consumed]
            tx.append(TxItem(flat, t + i, em))
            consumed += 1

    codewords: list[CodewordSpec] = []
    first_parity = p.T - p.N2 + 1
    if sched.grouped:
        gs = d.k_dprime
        n_code, k_code = p.T + 1 - p.N1, d.l_dprime
        for pos in range(gs):
            sys_items = tuple(
                r * gs + pos for r in range(k_code) if r * gs + pos < len(tx)
            )
            pars = tuple(
                (t + first_parity + m, pos) for m in range(p.N2)
            )
            codewords.append(CodewordSpec(n_code, k_code, sys_items, pars))
    else:
        n_code, k_code = d.n_dprime, d.k_dprime
        for layer in range(d.l_dprime):
            sys_items = tuple(
                w * d.l_dprime + layer for w in range(k_code) if w * d.l_dprime + layer < len(tx)
            )
            pars = tuple((t + first_parity + m, layer) for m in range(p.N2))
            codewords.append(CodewordSpec(n_code, k_code, sys_items, pars))

    return MessagePlan(t, erased_msg, sched, tuple(tx), tuple(codewords))


_SECOND_CODES: dict[tuple[SchemeParams, int, int], MdsCode] = {}


def second_code(p: SchemeParams, n: int, k: int) -> MdsCode:
    key = (p, n, k)
    code = _SECOND_CODES.get(key)
    if code is None:
        field, _ = _codes_cached(p)
        code = make_mds(field, n, k)
        _SECOND_CODES[key] = code
    return code


# ---------------------------------------------------------------------------
# parity groups (value level)


@dataclass(frozen=True)
class ParityGroups:
    """Parity symbols for one message: rows[m][i] rides parity slot m."""

    t: int
    grouped: bool
    rows: tuple[tuple[int, ...], ...]


def build_parity_groups(
    p: SchemeParams, plan: MessagePlan, values: list[int], strict: bool = True
) -> ParityGroups:
    """MDS parities over the transmitted symbol values of one message.

    values[i] is the value of plan.tx[i].  With strict=True, a grouped plan
    whose transmission fell short of k_src estimates raises
    IncompleteEstimates; otherwise missing symbols encode as zeros.
    """
    d = derive_dims(p)
    if len(values) != len(plan.tx):
        raise IncompleteEstimates(
            f"{len(values)} values for {len(plan.tx)} transmitted symbols"
        )
    if strict and plan.codewords and len(plan.tx) < d.k_src:
        raise IncompleteEstimates(
            f"message {plan.t}: only {len(plan.tx)} of {d.k_src} symbols scheduled"
        )
    if not plan.codewords or p.N2 == 0:
        return ParityGroups(plan.t, plan.schedule.grouped, tuple(() for _ in range(p.N2)))
    rows: list[list[int]] = [[] for _ in range(p.N2)]
    for cw in plan.codewords:
        code = second_code(p, cw.n, cw.k)
        msg = [0] * cw.k
        for r, item in enumerate(cw.sys_items):
            msg[r] = values[item]
        word = code.encode(msg)
        for m in range(p.N2):
            rows[m].append(word[cw.k + m])
    return ParityGroups(plan.t, plan.schedule.grouped, tuple(tuple(r) for r in rows))


# ---------------------------------------------------------------------------
# relay packet assembly


@dataclass(frozen=True)
class RelayPacket:
    slot: int
    subpackets: tuple[tuple[int, tuple[int, ...]], ...]  # (t, symbols), oldest first
    header: tuple[int, ...] = ()

    @property
    def payload_symbols(self) -> int:
        return sum(len(s) for _, s in self.subpackets)

    def wire_symbols(self) -> list[int]:
        out = list(self.header)
        for _, syms in self.subpackets:
            out.extend(syms)
        return out


class RelayState:
    """Drives the relay across an episode: ingest first hop, emit second hop.

    Message-phase scheduling is strictly causal: at slot s the relay uses only
    erasure bits and estimates up to s.  The full MessagePlan (needed for the
    parity layout) is materialized only once a message's data window
    [t, t+T-N2] lies in the past, at which point it provably reproduces the
    causal decisions already taken.
    """

    def __init__(self, p: SchemeParams, header_mode: bool = False):
        self.params = p
        self.dims = derive_dims(p)
        self.ledger = EstimateLedger(p)
        self.header_mode = header_mode
        self.plans: dict[int, MessagePlan] = {}
        self.parities: dict[int, ParityGroups] = {}
        self._consumed: dict[int, int] = {}

    def ingest_source(self, slot: int, packet: SourcePacket | None) -> None:
        self.ledger.ingest(slot, packet)

    def full_plan(self, t: int) -> MessagePlan:
        """Plan for message t; only valid once slot t+T-N2 was ingested."""
        plan = self.plans.get(t)
        if plan is None:
            if self.ledger.next_slot <= t + self.params.T - self.params.N2:
                raise ScheduleOverrun(
                    f"plan for message {t} requested before its window closed"
                )
            plan = build_message_plan(self.params, self.ledger.erased, t)
            self.plans[t] = plan
        return plan

    def _queue_value(self, t: int, idx: int) -> int:
        """idx-th symbol of message t's transmission queue (ledger order)."""
        d = self.dims
        if self.ledger.erased(t):
            recs = self.ledger.records_for(t)
            if idx >= len(recs):
                raise ScheduleOverrun(f"message {t}: queue index {idx} beyond ledger")
            return recs[idx].value
        w, layer = idx // d.l_dprime, idx % d.l_dprime
        flat = layer * d.k_dprime + w
        return self.ledger.packets[t].rows[flat // d.k_prime][flat % d.k_prime]

    def _message_phase_alpha(self, t: int, slot: int) -> int:
        """Causal Algorithm-1 step for message t at slot = t+i, i <= T-N2."""
        p, d = self.params, self.dims
        i = slot - t
        erased_msg = self.ledger.erased(t)
        g = sum(1 for a in range(t + 1, slot) if self.ledger.erased(a))
        if i < p.j or (not erased_msg):
            cap = d.l_dprime if i >= p.j else 0
        elif g <= p.j - 1:
            cap = d.l_dprime
        elif i >= p.N1:
            cap = d.k_dprime
        else:
            cap = 0
        avail = self.ledger.available_count(t, slot)
        return min(cap, avail - self._consumed.get(t, 0))

    def emit(self, slot: int) -> RelayPacket:
        """Relay packet for this slot; first-hop slots <= slot must have been
        ingested already."""
        p = self.params
        subpackets = []
        for t in range(max(0, slot - p.T), slot - p.j + 1):
            i = slot - t
            if i <= p.T - p.N2:
                size = self._message_phase_alpha(t, slot)
                if size <= 0:
                    continue
                start = self._consumed.get(t, 0)
                syms = tuple(self._queue_value(t, start + r) for r in range(size))
                self._consumed[t] = start + size
            else:
                plan = self.full_plan(t)
                if plan.schedule.alpha[i] == 0:
                    continue
                pg = self.parities.get(t)
                if pg is None:
                    vals = [self._queue_value(t, r) for r in range(len(plan.tx))]
                    pg = build_parity_groups(p, plan, vals, strict=False)
                    self.parities[t] = pg
                syms = tuple(pg.rows[i - (p.T - p.N2 + 1)])
            if syms:
                subpackets.append((t, syms))
        header = ()
        if self.header_mode:
            bits = [int(self.ledger.erased(s)) for s in range(slot - p.T, slot + 1)]
            header = encode_header(p, bits)
        return RelayPacket(slot, tuple(subpackets), header)


# ---------------------------------------------------------------------------
# erasure-pattern header


def encode_header(p: SchemeParams, window_bits) -> tuple[int, ...]:
    """Pack T+1 erasure bits into delta base-q symbols (little-endian)."""
    bits = [int(b) for b in window_bits]
    if len(bits) != p.T + 1:
        raise ValueError(f"header covers T+1 = {p.T + 1} bits, got {len(bits)}")
    q = implemented_field_size(p)
    delta = header_overhead(p)
    x = 0
    for b in reversed(bits):
        x = (x << 1) | b
    out = []
    for _ in range(delta):
        out.append(x % q)
        x //= q
    if x:
        raise ValueError("window does not fit the header alphabet")  # pragma: no cover
    return tuple(out)


def decode_header(p: SchemeParams, symbols) -> tuple[int, ...]:
    """Inverse of encode_header."""
    q = implemented_field_size(p)
    delta = header_overhead(p)
    syms = list(symbols)
    if len(syms) != delta:
        raise ValueError(f"expected {delta} header symbols, got {len(syms)}")
    x = 0
    for s in reversed(syms):
        x = x * q + s
    bits = []
    for _ in range(p.T + 1):
        bits.append(x & 1)
        x >>= 1
    return tuple(bits)
