"""Destination decoder: replays the relay's plan symbolically and decodes.

The destination never sees the first hop.  It learns the first-hop erasure
pattern either out of band (oracle side information, the default) or from the
delta-symbol header each relay packet carries, rebuilds every message's
transmission plan with the exact code the relay used, slices received relay
packets into subpackets, and then:

1. per second-hop codeword, erasure-decodes as soon as any k of its n symbols
   are in hand (each codeword loses at most one symbol per erased slot);
2. maps the recovered transmission queue back to flat message indices;
3. cancels estimate interference using messages it already decoded, walking
   forward in time so dependencies are always resolved first.

A message still undecodable after its deadline t+T is FAILED -- a value, not
an error; a later message whose interference references a FAILED one becomes
FAILED itself (loss propagation), which the caller sees as MissingDependency
handled internally.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .scheme_params import SchemeParams, derive_dims, header_overhead
from .source_codec import PosEmission, _codes_cached, emission_coefficients
from .relay_codec import MessagePlan, build_message_plan, decode_header, second_code

FAILED = "FAILED"


class MalformedPacket(ValueError):
    """Relay packet length disagrees with the reconstructed schedule."""


class MissingDependency(ValueError):
    """Interference cancellation needs a message that was never decoded."""


@dataclass(frozen=True)
class SymbolRecord:
    """One received second-hop symbol in codeword coordinates."""

    t: int
    role: str  # "estimate" (systematic) or "parity"
    codeword: int
    position: int
    value: int


def interference_terms(p: SchemeParams, em: PosEmission, layer: int):
    """(t', flat', coeff) interference an estimate of ``layer`` carries.

    Mirrors the relay's bookkeeping: of the leftover combination
    coefficients, exactly the positions the relay could not cancel eagerly
    (recorded in the emission) survive into the transmitted value.
    """
    field, code = _codes_cached(p)
    d = derive_dims(p)
    _, mu = emission_coefficients(field, code, em)
    kept = {q for (_, q) in em.interference}
    out = []
    for q, coeff in mu.items():
        if q not in kept:
            continue
        src_t = em.t - em.pos + q
        out.append((src_t, layer * d.k_prime + q, coeff))
    return out


@dataclass
class _MessageState:
    plan: MessagePlan | None = None
    got_tx: dict = dc_field(default_factory=dict)  # slot -> symbol list
    got_par: dict = dc_field(default_factory=dict)  # slot -> symbol list
    outcome: object = None  # None (pending) | list[int] | FAILED
    decode_slot: int | None = None
    records: list = dc_field(default_factory=list)


class DecoderState:
    """Destination state across an episode.

    With oracle side information pass the first-hop pattern as ``e1_erased``
    (slot -> bool).  In header mode pass None; the pattern is accumulated
    from received packet headers, and anything that needs bits not yet
    covered by a header simply waits.
    """

    def __init__(self, p: SchemeParams, e1_erased=None, header_mode: bool = False):
        if header_mode and e1_erased is not None:
            raise ValueError("header mode reconstructs the pattern; do not pass one")
        if not header_mode and e1_erased is None:
            raise ValueError("oracle mode needs the first-hop pattern")
        self.params = p
        self.dims = derive_dims(p)
        self.field, self.first_code = _codes_cached(p)
        self.header_mode = header_mode
        self._oracle = e1_erased
        self._known_bits: dict[int, int] = {}
        self.msgs: dict[int, _MessageState] = {}
        self.last_slot = -1

    # -- first-hop pattern knowledge ------------------------------------------

    def _bit_known(self, slot: int) -> bool:
        if slot < 0 or not self.header_mode:
            return True
        return slot in self._known_bits

    def _erased1(self, slot: int) -> bool:
        if slot < 0:
            return False
        if not self.header_mode:
            return bool(self._oracle(slot))
        return bool(self._known_bits.get(slot, 1))  # unknown treated as erased

    def _plan_ready(self, t: int) -> bool:
        """All pattern bits a full plan for message t can depend on are known."""
        k = self.dims.k_prime
        lo = max(0, t - 2 * (k - 1))
        hi = t + self.params.T - self.params.N2
        return all(self._bit_known(s) for s in range(lo, hi + 1))

    def plan(self, t: int) -> MessagePlan | None:
        st = self._state(t)
        if st.plan is None and self._plan_ready(t):
            st.plan = build_message_plan(self.params, self._erased1, t)
        return st.plan

    def _state(self, t: int) -> _MessageState:
        st = self.msgs.get(t)
        if st is None:
            st = _MessageState()
            self.msgs[t] = st
        return st

    # -- ingest -----------------------------------------------------------------

    def ingest(self, slot: int, wire) -> None:
        """Feed the relay-hop slot ``slot``: symbol list, or None if erased."""
        p = self.params
        self.last_slot = max(self.last_slot, slot)
        if wire is None:
            return
        symbols = list(wire)
        if self.header_mode:
            delta = header_overhead(p)
            if len(symbols) < delta:
                raise MalformedPacket(f"slot {slot}: packet shorter than its header")
            for off, b in enumerate(decode_header(p, symbols[:delta])):
                s = slot - p.T + off
                if s >= 0:
                    self._known_bits[s] = b
            symbols = symbols[delta:]
        offset = 0
        for t in range(max(0, slot - p.T), slot - p.j + 1):
            size = self._subpacket_size(t, slot)
            if size == 0:
                continue
            if offset + size > len(symbols):
                raise MalformedPacket(
                    f"slot {slot}: payload ends inside the subpacket of message {t}"
                )
            self._file_symbols(t, slot, symbols[offset : offset + size])
            offset += size
        if offset != len(symbols):
            raise MalformedPacket(
                f"slot {slot}: {len(symbols) - offset} trailing symbols beyond the schedule"
            )

    def _subpacket_size(self, t: int, slot: int) -> int:
        """alpha_t(slot - t), from the known pattern bits.

        In header mode a message whose full window is still open gets a
        transient plan with unseen bits masked as erased; for slot offsets
        already in the past that reproduces the relay's causal decision
        exactly (the relay had the same bits and no more).
        """
        plan = self.plan(t)
        if plan is None:
            plan = build_message_plan(self.params, self._erased1, t)
        return plan.schedule.alpha[slot - t]

    def _file_symbols(self, t: int, slot: int, syms: list[int]) -> None:
        st = self._state(t)
        if slot - t <= self.params.T - self.params.N2:
            st.got_tx[slot] = syms
        else:
            st.got_par[slot] = syms

    # -- decoding -----------------------------------------------------------------

    def try_decode(self, t: int, now: int | None = None):
        """Attempt to finalize message t: list | "pending" | FAILED.

        FAILED is permanent and only reached once ``now`` passes the deadline
        t+T (or a dependency is FAILED, which dooms this message too).
        Callers should attempt pending messages in ascending t so that
        interference dependencies resolve first.
        """
        p = self.params
        now = self.last_slot if now is None else now
        st = self._state(t)
        if st.outcome is not None:
            return st.outcome
        try:
            result = self._attempt(t, st)
        except MissingDependency:
            result = FAILED
        if result is not None:
            st.outcome = result
            if result is not FAILED:
                st.decode_slot = now
            return result
        if now > t + p.T:
            st.outcome = FAILED
            return FAILED
        return "pending"

    def _attempt(self, t: int, st: _MessageState):
        p, d = self.params, self.dims
        plan = self.plan(t)
        if plan is None:
            return None  # pattern bits still missing (header mode)

        # received symbols in queue / codeword coordinates
        tx_vals: dict[int, int] = {}
        consumed = 0
        for i in range(p.T - p.N2 + 1):
            a = plan.schedule.alpha[i]
            got = st.got_tx.get(t + i)
            if got is not None:
                for r, v in enumerate(got):
                    tx_vals[consumed + r] = v
            consumed += a
        par_vals: dict[tuple[int, int], int] = {}
        first_parity = p.T - p.N2 + 1
        for slot, syms in st.got_par.items():
            m = slot - t - first_parity
            for ci, v in enumerate(syms):
                par_vals[(ci, m)] = v
        st.records = [
            SymbolRecord(t, "estimate", self._codeword_of(plan, idx), idx, v)
            for idx, v in sorted(tx_vals.items())
        ] + [
            SymbolRecord(t, "parity", ci, plan.codewords[ci].k + m, v)
            for (ci, m), v in sorted(par_vals.items())
        ]

        # decode every codeword that is still missing systematic symbols
        queue_vals: dict[int, int] = dict(tx_vals)
        for ci, cw in enumerate(plan.codewords):
            if all(item in queue_vals for item in cw.sys_items):
                continue
            received = [
                (r, queue_vals[item])
                for r, item in enumerate(cw.sys_items)
                if item in queue_vals
            ]
            # positions beyond the scheduled queue were zero-padded at the relay
            received += [(r, 0) for r in range(len(cw.sys_items), cw.k)]
            received += [
                (cw.k + m, par_vals[(ci, m)]) for m in range(p.N2) if (ci, m) in par_vals
            ]
            if len(received) < cw.k:
                return None  # not yet decodable
            word = second_code(p, cw.n, cw.k).erasure_decode(received)
            for r, item in enumerate(cw.sys_items):
                queue_vals[item] = word[r]

        if not plan.erased:
            out = [0] * d.k_src
            for idx, v in queue_vals.items():
                out[plan.tx[idx].flat] = v
            return out
        est = {plan.tx[idx].flat: (idx, v) for idx, v in queue_vals.items()}
        if len(est) < d.k_src:
            return None  # relay never forwarded a full message (inadmissible hop)
        return self._cancel(t, plan, est)

    def _codeword_of(self, plan: MessagePlan, idx: int) -> int:
        for ci, cw in enumerate(plan.codewords):
            if idx in cw.sys_items:
                return ci
        return -1

    def _cancel(self, t: int, plan: MessagePlan, est: dict):
        """Subtract interference using already-decoded messages."""
        d = self.dims
        out = [0] * d.k_src
        for flat, (idx, value) in est.items():
            em = plan.tx[idx].emission
            terms = (
                interference_terms(self.params, em, flat // d.k_prime) if em else ()
            )
            for (t2, flat2, coeff) in terms:
                dep = self.msgs.get(t2)
                dep_val = dep.outcome if dep is not None else None
                if dep_val is FAILED:
                    raise MissingDependency(
                        f"message {t} needs FAILED message {t2} for cancellation"
                    )
                if dep_val is None:
                    return None  # dependency still pending; its deadline is earlier
                value = self.field.sub(value, self.field.mul(coeff, dep_val[flat2]))
            out[flat] = value
        return out


def dest_ingest(state: DecoderState, slot: int, packet, side_info=None) -> DecoderState:
    """Feed one relay-hop slot into the decoder (packet=None for erased).

    ``packet`` may be a RelayPacket or a plain symbol list; ``side_info`` can
    carry the first-hop erasure bit of ``slot`` as a cross-check in oracle
    mode.
    """
    wire = packet.wire_symbols() if hasattr(packet, "wire_symbols") else packet
    if side_info is not None and not state.header_mode:
        if bool(side_info) != state._erased1(slot):
            raise ValueError(f"side information for slot {slot} contradicts the oracle")
    state.ingest(slot, wire)
    return state


def try_decode(state: DecoderState, t: int, now: int | None = None):
    return state.try_decode(t, now)


def cancel_interference(field, records, history: dict):
    """Standalone cancellation: records maps flat -> (value, [(t', flat', c)]).

    history maps t' -> decoded message (list) or FAILED.  Raises
    MissingDependency when a needed message is absent or FAILED.
    """
    out = {}
    for flat, (value, terms) in records.items():
        for (t2, flat2, coeff) in terms:
            dep = history.get(t2)
            if dep is None or dep is FAILED:
                raise MissingDependency(f"needs message {t2}")
            value = field.sub(value, field.mul(coeff, dep[flat2]))
        out[flat] = value
    return out


# ---------------------------------------------------------------------------
# independent oracle: decode one message by generic linear algebra
#
# Every received symbol of message t is an affine functional of the k_src
# unknowns s_t[.] once older messages are substituted from `history`.  Solving
# the stacked system with plain Gaussian elimination must agree with the
# structured decoder above whenever the latter succeeds.


def oracle_decode(p: SchemeParams, plan: MessagePlan, state: DecoderState, history: dict):
    """Decode message plan.t from raw received symbols by solving one linear
    system, ignoring the codeword structure.  Returns list | None."""
    field = state.field
    d = derive_dims(p)
    t = plan.t
    st = state.msgs.get(t)
    if st is None:
        return None

    def tx_row(idx: int):
        """Functional of plan.tx[idx] over the unknowns, plus constant."""
        row = [0] * d.k_src
        const = 0
        item = plan.tx[idx]
        row[item.flat] = 1
        if item.emission is not None:
            for (t2, flat2, coeff) in interference_terms(
                p, item.emission, item.flat // d.k_prime
            ):
                dep = history.get(t2)
                if dep is None or dep is FAILED:
                    raise MissingDependency(f"needs message {t2}")
                const = field.add(const, field.mul(coeff, dep[flat2]))
        return row, const

    rows, rhs = [], []
    consumed = 0
    for i in range(p.T - p.N2 + 1):
        a = plan.schedule.alpha[i]
        got = st.got_tx.get(t + i)
        if got is not None:
            for r, v in enumerate(got):
                row, const = tx_row(consumed + r)
                rows.append(row)
                rhs.append(field.sub(v, const))
        consumed += a
    first_parity = p.T - p.N2 + 1
    for slot, syms in st.got_par.items():
        m = slot - t - first_parity
        for ci, v in enumerate(syms):
            cw = plan.codewords[ci]
            code = second_code(p, cw.n, cw.k)
            row = [0] * d.k_src
            const = 0
            for r in range(len(cw.sys_items)):
                g = code.parity[r][m]
                if not g:
                    continue
                srow, sconst = tx_row(cw.sys_items[r])
                for f_i, c_i in enumerate(srow):
                    if c_i:
                        row[f_i] = field.add(row[f_i], field.mul(g, c_i))
                const = field.add(const, field.mul(g, sconst))
            rows.append(row)
            rhs.append(field.sub(v, const))

    # rectangular Gauss-Jordan: solvable iff every unknown gets a pivot
    if len(rows) < d.k_src:
        return None
    aug = [row[:] + [b] for row, b in zip(rows, rhs)]
    pivot_row: dict[int, int] = {}
    rank = 0
    for col in range(d.k_src):
        piv = next((r for r in range(rank, len(aug)) if aug[r][col]), None)
        if piv is None:
            return None
        aug[rank], aug[piv] = aug[piv], aug[rank]
        inv = field.inv(aug[rank][col])
        aug[rank] = [field.mul(inv, v) for v in aug[rank]]
        for r in range(len(aug)):
            if r != rank and aug[r][col]:
                f = aug[r][col]
                aug[r] = [field.sub(v, field.mul(f, w)) for v, w in zip(aug[r], aug[rank])]
        pivot_row[col] = rank
        rank += 1
    return [aug[pivot_row[col]][d.k_src] for col in range(d.k_src)]
