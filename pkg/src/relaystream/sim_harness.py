"""End-to-end simulation: episode runner, adversarial verifier, loss curves.

Verification strategy.  Running every admissible pattern pair through the
full codec is infeasible beyond toy sizes (the pair count grows like 4^T), so
`exhaustive_verify` splits the claim:

* Structure.  Everything the relay schedules for message t -- subpacket
  sizes, queue layout, codeword shapes and slots -- is a pure function of the
  T+1 erasure bits starting at t, and the relay payload at slot s is a pure
  function of the T+1 bits ending at s.  Enumerating every admissible
  (T+1)-bit window therefore checks schedule conservation, availability
  counts, payload bounds, and the per-codeword slot discipline (no codeword
  puts two symbols in one slot, spans at most [t, t+T], and carries exactly
  N2 parities) against *all* admissible first-hop patterns at once.  The slot
  discipline is what makes any admissible second hop survivable: at most N2
  of each codeword's symbols can be lost, which its parity budget covers.
* Values.  The symbol-level pipeline (estimate extraction, interference
  bookkeeping, MDS decode, cancellation) is exercised by driving full
  episodes over probe pattern families and seeded admissible samples, with
  decoded output compared against the ground-truth messages; small parameter
  sets get the complete pattern-pair cross product.

Loss estimation runs in two modes sharing identical pattern streams per
seed: `analytic` classifies each message by the closed-form loss conditions
(vectorized, no codec), `codec` runs the real pipeline.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .scheme_params import (
    FULLY_ADAPTIVE_PACKET_BYTES,
    FULLY_ADAPTIVE_RATE,
    SchemeParams,
    derive_dims,
    nonadaptive_rate,
    optimal_j,
    packet_size_bits,
    rate_r2,
    scheme_rate,
)
from .erasure_channel import (
    ChannelConfig,
    ErasurePattern,
    HorizonTooLarge,
    count_admissible,
    enumerate_admissible,
    is_admissible,
    pattern_from_bits,
)
from .source_codec import _codes_cached, encode_source
from .relay_codec import RelayState, build_message_plan
from .dest_codec import FAILED, DecoderState

VERIFY_T_LIMIT = 7  # full mode; larger T must use randomized=True


# ---------------------------------------------------------------------------
# episode runner


@dataclass(frozen=True)
class EpisodeReport:
    """Outcome of one source->relay->destination run."""

    params: SchemeParams
    horizon: int
    decode_slots: dict  # message t -> slot it was finalized (decoded only)
    failed: tuple  # assessable messages that ended FAILED
    payloads: tuple  # relay payload symbols per slot
    max_payload: int
    violations: tuple  # (kind, detail) pairs; empty on a healthy run

    @property
    def ok(self) -> bool:
        return not self.failed and not self.violations


def _as_bits(pattern, horizon: int):
    if isinstance(pattern, ErasurePattern):
        bits = list(pattern.bits)
    else:
        bits = [int(b) for b in pattern]
    if len(bits) < horizon:
        raise ValueError(f"pattern covers {len(bits)} slots, horizon is {horizon}")
    return bits[:horizon]


def run_episode(
    p: SchemeParams,
    e1,
    e2,
    horizon: int | None = None,
    seed: int = 0,
    header_mode: bool = False,
) -> EpisodeReport:
    """Drive the full pipeline over one pattern pair and audit the outcome.

    Decoded messages are compared with ground truth; failures and invariant
    violations are recorded in the report rather than raised, so inadmissible
    patterns degrade into FAILED messages instead of crashes.
    """
    if horizon is None:
        horizon = len(e1.bits) if isinstance(e1, ErasurePattern) else len(e1)
    d = derive_dims(p)
    field, _ = _codes_cached(p)
    bits1 = _as_bits(e1, horizon)
    bits2 = _as_bits(e2, horizon)
    rng = np.random.default_rng([seed, 0x5E_ED])
    msgs = rng.integers(0, field.q, size=(horizon, d.k_src))

    def erased1(s: int) -> bool:
        return 0 <= s < horizon and bool(bits1[s])

    relay = RelayState(p, header_mode=header_mode)
    dest = (
        DecoderState(p, header_mode=True)
        if header_mode
        else DecoderState(p, e1_erased=erased1)
    )
    history: list[list[int]] = []
    payloads = []
    outcomes: dict[int, object] = {}
    decode_slots: dict[int, int] = {}
    pending: list[int] = []
    violations: list[tuple] = []
    for s in range(horizon):
        history.append([int(x) for x in msgs[s]])
        relay.ingest_source(s, None if bits1[s] else encode_source(p, history))
        rp = relay.emit(s)
        payloads.append(rp.payload_symbols)
        if rp.payload_symbols > d.n2_star:
            violations.append(("payload-bound", s, rp.payload_symbols))
        dest.ingest(s, None if bits2[s] else rp.wire_symbols())
        pending.append(s)
        still = []
        for t in pending:
            r = dest.try_decode(t, now=s)
            if r == "pending":
                still.append(t)
            elif r is FAILED:
                outcomes[t] = FAILED
            else:
                outcomes[t] = r
                decode_slots[t] = s
        pending = still

    failed = []
    n_assess = max(0, horizon - p.T)
    for t in range(n_assess):
        got = outcomes.get(t)
        if got is FAILED or got is None:
            failed.append(t)
        elif got != history[t]:
            violations.append(("wrong-value", t))
        elif decode_slots[t] > t + p.T:
            violations.append(("late", t, decode_slots[t]))
    return EpisodeReport(
        p,
        horizon,
        decode_slots,
        tuple(failed),
        tuple(payloads),
        max(payloads) if payloads else 0,
        tuple(violations),
    )


# ---------------------------------------------------------------------------
# exhaustive adversarial verification


@dataclass(frozen=True)
class VerifyReport:
    params: SchemeParams
    horizon: int
    ok: bool
    windows_checked: int
    episodes_run: int
    max_payload: int
    payload_target: int
    counterexample: dict | None
    notes: tuple = ()


def _window_plan_checks(p: SchemeParams, window: tuple, cache: dict):
    """Schedule/codeword certificate for a message whose local pattern is
    ``window`` (bit 0 = the message's own slot).  Returns (alpha, problem)."""
    d = derive_dims(p)
    key = window[: p.T - p.N2 + 1]
    hit = cache.get(key)
    if hit is not None:
        return hit

    def erased(s: int) -> bool:
        return 0 <= s < len(window) and bool(window[s])

    plan = build_message_plan(p, erased, 0)
    alpha = plan.schedule.alpha
    problem = None
    msg_total = sum(alpha[: p.T - p.N2 + 1])
    if msg_total != d.k_src:
        problem = f"scheduled {msg_total} != k_src {d.k_src}"
    elif any(alpha[i] for i in range(min(p.j, len(alpha)))):
        problem = "symbols scheduled before t+j"
    elif sorted(item.flat for item in plan.tx) != list(range(d.k_src)):
        problem = "transmission queue does not cover the message exactly once"
    if problem is None and plan.erased:
        # availability bookkeeping: each received slot unlocks one position
        # across all layers at once, until the message is exhausted
        for i in range(p.T - p.N2 + 1):
            got = d.l_prime * len(
                {item.emission.pos for item in plan.tx if item.emission and item.emission.slot <= i}
            )
            want = min(d.k_src, d.l_prime * sum(1 for a in range(1, i + 1) if not erased(a)))
            if got != want:
                problem = f"availability at offset {i}: {got} != {want}"
                break
    if problem is None:
        expect_cw = d.k_dprime if plan.schedule.grouped else d.l_dprime
        if len(plan.codewords) != expect_cw:
            problem = f"{len(plan.codewords)} codewords, expected {expect_cw}"
    if problem is None:
        for cw in plan.codewords:
            slots = [plan.tx[it].slot for it in cw.sys_items]
            slots += [slot for slot, _ in cw.parity_slots]
            if len(cw.sys_items) != cw.k or cw.n - cw.k != p.N2:
                problem = f"codeword shape ({cw.n},{cw.k}) with {len(cw.sys_items)} systematic"
                break
            if len(set(slots)) != len(slots):
                problem = "codeword rides one slot twice"
                break
            if min(slots) < 0 or max(slots) > p.T:
                problem = f"codeword span [{min(slots)},{max(slots)}] leaves [t,t+T]"
                break
    out = (alpha, problem)
    cache[key] = out
    return out


def _structural_pass(p: SchemeParams, windows) -> tuple:
    """Run the window certificate; returns (count, max_payload, counterexample)."""
    d = derive_dims(p)
    cache: dict = {}
    max_payload = 0
    count = 0
    for window in windows:
        count += 1
        # message-level checks, keyed by the message's visible prefix
        _, problem = _window_plan_checks(p, window, cache)
        if problem is not None:
            return count, max_payload, {"window": window, "problem": problem}
        # payload at the slot that sees `window` as its trailing T+1 bits
        payload = 0
        for t in range(0, p.T - p.j + 1):
            sub = window[t:]
            alpha, problem = _window_plan_checks(p, sub, cache)
            if problem is not None:
                return count, max_payload, {"window": sub, "problem": problem}
            payload += alpha[p.T - t]
        max_payload = max(max_payload, payload)
        if payload > d.n2_star:
            return count, max_payload, {
                "window": window,
                "problem": f"payload {payload} exceeds n2* {d.n2_star}",
            }
    return count, max_payload, None


def attainable_payload(p: SchemeParams) -> int:
    """Exact worst-case relay payload, as certified by the window sweep.

    n2_star sizes packets for N1-j fallback-mode messages overlapping one
    slot, but a fallback subpacket only ships at offsets i in [N1, T], so at
    most T+1-N1 such messages can actually coincide.  With
    f = min(N1-j, T+1-N1) the worst slot carries f fallback subpackets of
    k_dprime symbols and T+1-j-f steady ones of l_dprime:

        k_dprime * f + l_dprime * (T+1-j-f)

    which equals n2_star whenever N1-j <= T+1-N1 and is strictly below it
    otherwise (n2_star stays a valid sizing bound either way).
    """
    d = derive_dims(p)
    f = min(p.N1 - p.j, p.T + 1 - p.N1)
    return d.k_dprime * f + d.l_dprime * (p.T + 1 - p.j - f)


def _admissible_windows(T: int, N1: int):
    for n_err in range(N1 + 1):
        for pos in itertools.combinations(range(T + 1), n_err):
            w = [0] * (T + 1)
            for x in pos:
                w[x] = 1
            yield tuple(w)


def _sample_admissible(T: int, N: int, horizon: int, rng, attempts: int = 400):
    """One seeded admissible pattern, biased toward heavy loss."""
    target = N / (T + 1)
    for _ in range(attempts):
        bits = (rng.random(horizon) < target).astype(int).tolist()
        if is_admissible(pattern_from_bits(bits), T, N):
            return bits
    return [0] * horizon


def _probe_e2_family(p: SchemeParams, horizon: int, rng, extra: int):
    """Second-hop probes: clean, every N2-burst placement, stride, samples."""
    T, N2 = p.T, p.N2
    family = [[0] * horizon]
    if N2 > 0:
        for start in range(horizon - N2 + 1):
            b = [0] * horizon
            for i in range(N2):
                b[start + i] = 1
            family.append(b)
        stride = [1 if (i % (T + 1)) < N2 else 0 for i in range(horizon)]
        family.append(stride)
    for _ in range(extra):
        family.append(_sample_admissible(T, N2, horizon, rng))
    return family


def _probe_e1_family(p: SchemeParams, horizon: int, rng, budget: int):
    """First-hop patterns: exhaustive when small, else bursts + samples."""
    T, N1 = p.T, p.N1
    total = count_admissible(T, N1, horizon)
    if total <= budget:
        return [list(pat.bits) for pat in enumerate_admissible(T, N1, horizon)], True
    family = [[0] * horizon]
    for start in (0, 1, p.j + 1, T, T + 2):
        if start + N1 <= horizon:
            b = [0] * horizon
            for i in range(N1):
                b[start + i] = 1
            family.append(b)
    # alternating singles stress interference chains
    comb = [1 if i % 2 == 0 else 0 for i in range(horizon)]
    if is_admissible(pattern_from_bits(comb), T, N1):
        family.append(comb)
    while len(family) < budget:
        family.append(_sample_admissible(T, N1, horizon, rng))
    return family, False


def exhaustive_verify(
    p: SchemeParams,
    horizon: int | None = None,
    *,
    seed: int = 0,
    randomized: bool = False,
    episode_budget: int = 48,
    cross_budget: int = 1600,
    window_budget: int = 4096,
) -> VerifyReport:
    """Adversarial achievability check for one parameter set.

    Full mode (T <= 7): every admissible (T+1)-bit window is certified
    structurally, and value-level episodes cover probe families (or the full
    pattern-pair cross product when it fits ``cross_budget``).  Randomized
    mode samples windows and pattern pairs instead and is the only mode
    allowed for T > 7.
    """
    if horizon is None:
        horizon = 2 * (p.T + 1)
    if horizon < p.T + 1:
        raise ValueError("horizon must cover at least one deadline window")
    if not randomized and p.T > VERIFY_T_LIMIT:
        raise HorizonTooLarge(
            f"full verification is guarded to T <= {VERIFY_T_LIMIT}; "
            f"rerun with randomized=True for T={p.T}"
        )
    d = derive_dims(p)
    rng = np.random.default_rng([seed, p.T, p.N1, p.N2, p.j])
    notes = []

    # -- structural certificate over local windows
    if randomized:
        all_windows = list(_admissible_windows(p.T, p.N1))
        if len(all_windows) > window_budget:
            idx = rng.choice(len(all_windows), window_budget, replace=False)
            windows = [all_windows[i] for i in sorted(idx)]
            notes.append(f"windows sampled {window_budget}/{len(all_windows)}")
        else:
            windows = all_windows
    else:
        windows = list(_admissible_windows(p.T, p.N1))
    target = attainable_payload(p)
    if target < d.n2_star:
        notes.append(
            f"worst payload {target} < sizing bound {d.n2_star} "
            f"(at most {p.T + 1 - p.N1} fallback messages can overlap)"
        )
    n_windows, max_structural_payload, counter = _structural_pass(p, windows)
    if counter is not None:
        return VerifyReport(
            p, horizon, False, n_windows, 0, max_structural_payload, target,
            counter, tuple(notes),
        )
    if not randomized and max_structural_payload != target:
        return VerifyReport(
            p, horizon, False, n_windows, 0, max_structural_payload, target,
            {"problem": f"worst payload {max_structural_payload} != expected {target}"},
            tuple(notes),
        )

    # -- value-level episodes
    pairs: list[tuple[list, list]] = []
    n1_count = count_admissible(p.T, p.N1, horizon)
    n2_count = count_admissible(p.T, p.N2, horizon)
    if not randomized and n1_count * n2_count <= cross_budget:
        e1s = [list(x.bits) for x in enumerate_admissible(p.T, p.N1, horizon)]
        e2s = [list(x.bits) for x in enumerate_admissible(p.T, p.N2, horizon)]
        pairs = [(a, b) for a in e1s for b in e2s]
        notes.append(f"full cross product {len(e1s)}x{len(e2s)}")
    else:
        e1s, e1_exhaustive = _probe_e1_family(p, horizon, rng, budget=max(8, episode_budget // 6))
        e2s = _probe_e2_family(p, horizon, rng, extra=2)
        pairs.append((e1s[0], e2s[0]))
        k = 1
        for a in e1s:
            pairs.append((a, [0] * horizon))
            for _ in range(max(1, episode_budget // max(1, len(e1s)))):
                pairs.append((a, e2s[k % len(e2s)]))
                k += 1
        notes.append(
            f"probe episodes over {len(e1s)} first-hop patterns"
            + (" (exhaustive)" if e1_exhaustive else " (sampled)")
        )

    episodes = 0
    max_payload = 0
    for i, (a, b) in enumerate(pairs):
        try:
            rep = run_episode(p, a, b, horizon, seed=seed + i)
        except Exception as exc:  # codec bug surfaced by this pair
            return VerifyReport(
                p, horizon, False, n_windows, episodes, max_payload, d.n2_star,
                {"e1": a, "e2": b, "problem": f"{type(exc).__name__}: {exc}"},
                tuple(notes),
            )
        episodes += 1
        max_payload = max(max_payload, rep.max_payload)
        if not rep.ok:
            return VerifyReport(
                p, horizon, False, n_windows, episodes, max_payload, d.n2_star,
                {
                    "e1": a,
                    "e2": b,
                    "failed": rep.failed,
                    "violations": rep.violations,
                },
                tuple(notes),
            )
    return VerifyReport(
        p, horizon, True, n_windows, episodes,
        max(max_payload, max_structural_payload), target, None, tuple(notes),
    )


def all_valid_params(t_max: int = VERIFY_T_LIMIT, t_min: int = 1):
    """Every (T, N1, N2, j) the verifier sweeps: N1 >= 1, N1+N2 <= T, j < N1."""
    for T in range(t_min, t_max + 1):
        for n1 in range(1, T + 1):
            for n2 in range(0, T - n1 + 1):
                for j in range(n1):
                    yield SchemeParams(T, n1, n2, j)


# ---------------------------------------------------------------------------
# loss probability (Monte-Carlo, analytic and codec modes)


@dataclass(frozen=True)
class LossEstimate:
    scheme: str  # "adaptive" | "nonadaptive"
    mode: str  # "analytic" | "codec"
    trials: int
    losses: int
    probability: float
    stderr: float
    config: ChannelConfig
    params: SchemeParams


def _analytic_losses(p: SchemeParams, e1: np.ndarray, e2: np.ndarray, n_assess: int):
    """(adaptive_lost, nonadaptive_lost) boolean arrays over messages [0, n_assess)."""
    d = derive_dims(p)
    T, N1, N2, j = p.T, p.N1, p.N2, p.j
    n = len(e1)
    c1 = np.concatenate([[0], np.cumsum(e1, dtype=np.int64)])
    c2 = np.concatenate([[0], np.cumsum(e2, dtype=np.int64)])

    def count(c, a, b):
        """Erasures in the inclusive slot range [a, b]; outside slots are 0."""
        return c[np.clip(b + 1, 0, n)] - c[np.clip(a, 0, n)]

    t_idx = np.arange(n_assess)
    # first-hop recoverability: every diagonal window through the message
    # keeps enough nonerased slots
    diag_bad = np.zeros(n_assess, dtype=bool)
    for pos in range(d.k_prime):
        diag_bad |= count(c1, t_idx - pos, t_idx - pos + d.n_prime - 1) > N1
    erased_msg = e1[:n_assess].astype(bool)

    count_by_j = count(c1, t_idx, t_idx + j)  # erasures in [t, t+j]
    high_rate = (~erased_msg) | (count_by_j <= j)
    lost_high = count(c2, t_idx + j, t_idx + T) > N2
    lost_fallback = count(c2, t_idx + N1, t_idx + T) > N2
    adaptive_lost = diag_bad | np.where(high_rate, lost_high, lost_fallback)
    nonadaptive_lost = diag_bad | lost_fallback
    return adaptive_lost, nonadaptive_lost


def _codec_losses(p: SchemeParams, bits1, bits2, horizon: int, seed: int, n_assess: int):
    rep = run_episode(p, bits1, bits2, horizon, seed=seed)
    lost = np.zeros(n_assess, dtype=bool)
    for t in rep.failed:
        if t < n_assess:
            lost[t] = True
    for v in rep.violations:
        if v[0] == "wrong-value" and v[1] < n_assess:
            lost[v[1]] = True
    return lost


def _chunk_losses(p: SchemeParams, config: ChannelConfig, mode: str, scheme: str,
                  chunk: int, n_assess: int) -> tuple[int, int]:
    """(adaptive, nonadaptive) loss counts for one seeded pattern chunk."""
    rng = np.random.default_rng([config.seed, chunk])
    e1 = (rng.random(config.horizon) < config.alpha).astype(np.int64)
    e2 = (rng.random(config.horizon) < config.beta).astype(np.int64)
    a = na = 0
    if mode == "analytic" or scheme in ("nonadaptive", "both"):
        a_lost, na_lost = _analytic_losses(p, e1, e2, n_assess)
        na = int(na_lost.sum())
        if mode == "analytic":
            a = int(a_lost.sum())
    if mode == "codec" and scheme in ("adaptive", "both"):
        lost = _codec_losses(p, e1.tolist(), e2.tolist(), config.horizon,
                             config.seed + chunk, n_assess)
        a = int(lost.sum())
    return a, na


def loss_probability(
    p: SchemeParams,
    config: ChannelConfig,
    mode: str = "analytic",
    trials: int = 10**6,
    scheme: str = "adaptive",
    workers: int = 1,
):
    """Monte-Carlo message-loss probability under i.i.d. erasures.

    ``trials`` counts assessed messages.  Patterns are drawn in fixed-size
    chunks (config.horizon slots each) with per-chunk seeds derived from
    config.seed, so both modes and both schemes see identical streams and
    the result is independent of ``workers``.  The nonadaptive baseline is
    defined by its analytic condition in either mode (it has no separate
    codec).  scheme="both" returns a dict.
    """
    if mode not in ("analytic", "codec"):
        raise ValueError(f"unknown mode {mode!r}")
    if scheme not in ("adaptive", "nonadaptive", "both"):
        raise ValueError(f"unknown scheme {scheme!r}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    per_chunk = config.horizon - p.T
    if per_chunk < 1:
        raise ValueError("config.horizon must exceed T")
    jobs = []
    done = 0
    while done < trials:
        n_assess = min(per_chunk, trials - done)
        jobs.append((len(jobs), n_assess))
        done += n_assess
    losses = {"adaptive": 0, "nonadaptive": 0}
    if workers > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = pool.map(
                _chunk_losses,
                *zip(*[(p, config, mode, scheme, c, n) for c, n in jobs]),
                chunksize=max(1, len(jobs) // (4 * workers)),
            )
            for a, na in results:
                losses["adaptive"] += a
                losses["nonadaptive"] += na
    else:
        for c, n in jobs:
            a, na = _chunk_losses(p, config, mode, scheme, c, n)
            losses["adaptive"] += a
            losses["nonadaptive"] += na

    def estimate(tag: str) -> LossEstimate:
        pr = losses[tag] / trials
        se = math.sqrt(pr * (1 - pr) / trials)
        m = "analytic" if (tag == "nonadaptive" and mode == "codec") else mode
        return LossEstimate(tag, m, trials, losses[tag], pr, se, config, p)

    if scheme == "both":
        return {tag: estimate(tag) for tag in ("adaptive", "nonadaptive")}
    return estimate(scheme)


# ---------------------------------------------------------------------------
# figure data (deterministic CSV)


def _write_csv(path, comment: str, header: list, rows: list) -> str:
    buf = io.StringIO()
    buf.write(f"# {comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())
    return str(path)


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def emit_figure_data(figure: int, path: str, **kw) -> str:
    """Deterministic CSV for one of the standard comparison datasets.

    2: achievable rates vs T (series: subset j=0, subset j=j*, nonadaptive,
       fully adaptive where reference constants exist);
    3: relay packet sizes vs T (bits and bytes per scheme);
    4: loss probability vs alpha=beta at fixed parameters;
    5: loss probability vs scheme rate at fixed (alpha, beta).
    """
    if figure == 2:
        return _figure_rates(path, **kw)
    if figure == 3:
        return _figure_sizes(path, **kw)
    if figure == 4:
        return _figure_loss_sweep(path, **kw)
    if figure == 5:
        return _figure_loss_vs_rate(path, **kw)
    raise ValueError(f"no figure {figure}; choose 2, 3, 4 or 5")


def _figure_rates(path, t_values=None, n1: int = 2, n2: int = 3) -> str:
    if t_values is None:
        t_values = list(range(5, 16))
    rows = []
    for T in t_values:
        if T < n1 + n2:
            continue
        base = SchemeParams(T, n1, n2, 0)
        jstar, _ = optimal_j(T, n1, n2)
        best = SchemeParams(T, n1, n2, jstar)
        rows.append([T, n1, n2, "subset_j0", 0, _fmt(float(scheme_rate(base)))])
        rows.append([T, n1, n2, "subset_jstar", jstar, _fmt(float(scheme_rate(best)))])
        rows.append([T, n1, n2, "nonadaptive", "", _fmt(float(nonadaptive_rate(T, n1, n2)))])
        fa = FULLY_ADAPTIVE_RATE.get((T, n1, n2))
        rows.append([T, n1, n2, "fully_adaptive", "", "" if fa is None else _fmt(float(fa))])
    return _write_csv(
        path,
        f"achievable rates, N1={n1} N2={n2}",
        ["T", "N1", "N2", "series", "j", "rate"],
        rows,
    )


def _figure_sizes(path, t_values=None, n1: int = 4, n2: int = 6, j: int = 0) -> str:
    if t_values is None:
        t_values = list(range(10, 16))
    rows = []
    for T in t_values:
        if T + 1 - n1 - n2 < 1 or j >= n1:
            continue
        p = SchemeParams(T, n1, n2, j)
        sub_bits = packet_size_bits(p, "relay")
        na_bits = packet_size_bits(p, "nonadaptive-baseline")
        rows.append([T, n1, n2, j, "subset", sub_bits, _fmt(sub_bits / 8)])
        rows.append([T, n1, n2, j, "nonadaptive", na_bits, _fmt(na_bits / 8)])
        fa = FULLY_ADAPTIVE_PACKET_BYTES.get((T, n1, n2))
        rows.append([T, n1, n2, j, "fully_adaptive", "" if fa is None else fa * 8,
                     "" if fa is None else _fmt(float(fa))])
    return _write_csv(
        path,
        f"relay packet sizes, N1={n1} N2={n2} j={j}",
        ["T", "N1", "N2", "j", "series", "bits", "bytes"],
        rows,
    )


def _figure_loss_sweep(
    path,
    params: SchemeParams | None = None,
    probs=None,
    trials: int = 10**5,
    seed: int = 1,
    horizon: int = 512,
    mode: str = "analytic",
    workers: int = 1,
) -> str:
    if params is None:
        params = SchemeParams(5, 2, 3, 0)
    if probs is None:
        probs = [0.02, 0.04, 0.06, 0.08, 0.1]
    rows = []
    for pr in probs:
        cfg = ChannelConfig(pr, pr, seed, horizon)
        est = loss_probability(params, cfg, mode=mode, trials=trials, scheme="both",
                               workers=workers)
        for tag in ("adaptive", "nonadaptive"):
            e = est[tag]
            rows.append(
                [_fmt(float(pr)), tag, e.mode, e.trials, e.losses,
                 _fmt(e.probability), _fmt(e.stderr)]
            )
    return _write_csv(
        path,
        f"loss vs erasure probability, params={params}, seed={seed}",
        ["alpha_beta", "scheme", "mode", "trials", "losses", "loss_probability", "stderr"],
        rows,
    )


def _figure_loss_vs_rate(
    path,
    param_list=None,
    alpha: float = 0.05,
    beta: float = 0.08,
    trials: int = 10**5,
    seed: int = 1,
    horizon: int = 512,
    mode: str = "analytic",
    workers: int = 1,
) -> str:
    if param_list is None:
        # N2 sweep at fixed T, N1: each scheme traces loss against its own
        # rate; the interesting comparison is between curves at matched rate
        param_list = [SchemeParams(7, 2, n2, 0) for n2 in (2, 3, 4, 5)]
    rows = []
    for p in param_list:
        cfg = ChannelConfig(alpha, beta, seed, horizon)
        est = loss_probability(p, cfg, mode=mode, trials=trials, scheme="both",
                               workers=workers)
        rows.append(
            [p.T, p.N1, p.N2, p.j, _fmt(float(rate_r2(p))), "adaptive",
             est["adaptive"].losses, _fmt(est["adaptive"].probability),
             _fmt(est["adaptive"].stderr)]
        )
        rows.append(
            [p.T, p.N1, p.N2, p.j, _fmt(float(nonadaptive_rate(p.T, p.N1, p.N2))),
             "nonadaptive", est["nonadaptive"].losses,
             _fmt(est["nonadaptive"].probability), _fmt(est["nonadaptive"].stderr)]
        )
    return _write_csv(
        path,
        f"loss vs rate at alpha={alpha} beta={beta}, seed={seed}",
        ["T", "N1", "N2", "j", "rate", "scheme", "losses", "loss_probability", "stderr"],
        rows,
    )
