"""Grammar compression of symbol sequences by recursive pair replacement.

``repair_sequence`` repeatedly finds the most frequent adjacent symbol pair and
replaces every occurrence with a fresh nonterminal until no pair occurs twice,
producing a list of binary rules plus the final sequence.  Delimiter symbols
(code ``0``) never participate in pairs, so row boundaries survive untouched.

Occurrences of a pair like ``(u, u)`` inside a run ``u u u`` overlap; they are
counted greedily left to right (the run above counts one occurrence).

The implementation keeps the classic linked-list structure: doubly linked
neighbour pointers per position, per-pair occurrence lists, a hash table from
pair to record, and count buckets with one overflow bucket so the most frequent
pair is found in amortized constant time.  Ties on count are broken toward the
pair whose leftmost live occurrence comes first.  Everything lives in flat
int64 arrays so the hot loop can be compiled by numba with identical semantics
to the interpreted fallback (no Python hashing, no wrap-around arithmetic).
"""

from __future__ import annotations

import numpy as np

from ._accel import jit
from .errors import DimensionError

_EMPTY = -1
_KEY_SHIFT = 31
_KEY_MASK = (1 << _KEY_SHIFT) - 1

#: Counts above this share one overflow bucket that is scanned for the true max.
DEFAULT_BUCKET_LIMIT = 4096


@jit
def _hash_slot(key, cap):
    h = key ^ (key >> 21) ^ (key >> 42)
    return h & (cap - 1)


@jit
def _hash_find(hkeys, key, cap):
    """Slot containing *key*, or the empty slot where it belongs."""
    slot = _hash_slot(key, cap)
    while True:
        k = hkeys[slot]
        if k == key or k == _EMPTY:
            return slot
        slot += 1
        if slot == cap:
            slot = 0


@jit
def _rehash(rkey, n_recs, cap):
    hkeys = np.full(cap, _EMPTY, np.int64)
    hvals = np.empty(cap, np.int64)
    for rec in range(n_recs):
        slot = _hash_find(hkeys, rkey[rec], cap)
        hkeys[slot] = rkey[rec]
        hvals[slot] = rec
    return hkeys, hvals


@jit
def _grow(arr, cap, fill):
    out = np.full(cap, fill, np.int64)
    out[: arr.shape[0]] = arr
    return out


@jit
def _bucket_unlink(rec, rbucket, bnext, bprev, bucket_head):
    b = rbucket[rec]
    if b == _EMPTY:
        return
    nx = bnext[rec]
    pv = bprev[rec]
    if pv == _EMPTY:
        bucket_head[b] = nx
    else:
        bnext[pv] = nx
    if nx != _EMPTY:
        bprev[nx] = pv
    rbucket[rec] = _EMPTY


@jit
def _requeue(rec, rcount, rbucket, bnext, bprev, bucket_head, bmax):
    """Move a record to the bucket matching its count; return that bucket."""
    _bucket_unlink(rec, rbucket, bnext, bprev, bucket_head)
    c = rcount[rec]
    if c < 2:
        return _EMPTY
    b = c if c < bmax else bmax
    head = bucket_head[b]
    bnext[rec] = head
    bprev[rec] = _EMPTY
    if head != _EMPTY:
        bprev[head] = rec
    bucket_head[b] = rec
    rbucket[rec] = b
    return b


@jit
def _occ_add(pos, rec, occ_rec, occ_nxt, occ_prv, rhead, rcount):
    occ_rec[pos] = rec
    h = rhead[rec]
    occ_nxt[pos] = h
    occ_prv[pos] = _EMPTY
    if h != _EMPTY:
        occ_prv[h] = pos
    rhead[rec] = pos
    rcount[rec] += 1


@jit
def _occ_remove(pos, occ_rec, occ_nxt, occ_prv, rhead, rcount):
    rec = occ_rec[pos]
    nx = occ_nxt[pos]
    pv = occ_prv[pos]
    if pv == _EMPTY:
        rhead[rec] = nx
    else:
        occ_nxt[pv] = nx
    if nx != _EMPTY:
        occ_prv[nx] = pv
    occ_rec[pos] = _EMPTY
    rcount[rec] -= 1
    return rec


@jit
def _repair_core(seq_in, first_nt, bmax):  # noqa: C901 - one hot loop on purpose
    n = seq_in.shape[0]
    rules = np.empty((16, 2), np.int64)
    n_rules = 0
    if n < 2:
        return rules[:0].copy(), seq_in.copy()

    seq = seq_in.copy()
    nxt = np.empty(n, np.int64)
    prv = np.empty(n, np.int64)
    for i in range(n):
        nxt[i] = i + 1
        prv[i] = i - 1
    nxt[n - 1] = _EMPTY

    occ_rec = np.full(n, _EMPTY, np.int64)
    occ_nxt = np.empty(n, np.int64)
    occ_prv = np.empty(n, np.int64)

    rcap = 256
    rkey = np.empty(rcap, np.int64)
    rcount = np.zeros(rcap, np.int64)
    rhead = np.full(rcap, _EMPTY, np.int64)
    rbucket = np.full(rcap, _EMPTY, np.int64)
    bnext = np.empty(rcap, np.int64)
    bprev = np.empty(rcap, np.int64)
    n_recs = 0

    hcap = 1 << 12
    hkeys = np.full(hcap, _EMPTY, np.int64)
    hvals = np.empty(hcap, np.int64)

    bucket_head = np.full(bmax + 1, _EMPTY, np.int64)
    max_b = 0

    # Initial scan: count pair starts with greedy run handling.
    prev_counted = False
    prev_sym = np.int64(-2)
    for pos in range(n - 1):
        a = seq[pos]
        b = seq[pos + 1]
        if a != prev_sym:
            prev_counted = False
        counted = a != 0 and b != 0 and not (a == b and prev_counted)
        if counted:
            key = (a << _KEY_SHIFT) | b
            slot = _hash_find(hkeys, key, hcap)
            if hkeys[slot] == key:
                rec = hvals[slot]
            else:
                if n_recs == rcap:
                    rcap *= 2
                    rkey = _grow(rkey, rcap, 0)
                    rcount = _grow(rcount, rcap, 0)
                    rhead = _grow(rhead, rcap, _EMPTY)
                    rbucket = _grow(rbucket, rcap, _EMPTY)
                    bnext = _grow(bnext, rcap, 0)
                    bprev = _grow(bprev, rcap, 0)
                rec = n_recs
                rkey[rec] = key
                n_recs += 1
                hkeys[slot] = key
                hvals[slot] = rec
                if n_recs * 4 > hcap * 3:
                    hcap *= 2
                    hkeys, hvals = _rehash(rkey, n_recs, hcap)
            _occ_add(pos, rec, occ_rec, occ_nxt, occ_prv, rhead, rcount)
        prev_counted = counted and a == b
        prev_sym = a

    for rec in range(n_recs):
        b = _requeue(rec, rcount, rbucket, bnext, bprev, bucket_head, bmax)
        if b > max_b:
            max_b = b

    live = n
    rules_cap = 16

    while True:
        while max_b >= 2 and bucket_head[max_b] == _EMPTY:
            max_b -= 1
        if max_b < 2:
            break
        # The overflow bucket mixes counts; find the true maximum there.
        best_count = max_b
        if max_b == bmax:
            best_count = -1
            r = bucket_head[bmax]
            while r != _EMPTY:
                if rcount[r] > best_count:
                    best_count = rcount[r]
                r = bnext[r]
        # Tie-break: leftmost live occurrence wins.
        rec = _EMPTY
        best_pos = n
        r = bucket_head[max_b]
        while r != _EMPTY:
            if rcount[r] == best_count:
                p = rhead[r]
                mn = n
                while p != _EMPTY:
                    if p < mn:
                        mn = p
                    p = occ_nxt[p]
                if mn < best_pos:
                    best_pos = mn
                    rec = r
            r = bnext[r]

        new_code = first_nt + n_rules
        key = rkey[rec]
        a = key >> _KEY_SHIFT
        b_sym = key & _KEY_MASK

        cnt = rcount[rec]
        positions = np.empty(cnt, np.int64)
        p = rhead[rec]
        i = 0
        while p != _EMPTY:
            positions[i] = p
            i += 1
            p = occ_nxt[p]
        positions = np.sort(positions)

        for pi in range(cnt):
            pos = positions[pi]
            if occ_rec[pos] != rec:
                continue  # consumed by an overlapping replacement this round
            q = nxt[pos]
            r_ = nxt[q]
            l = prv[pos]

            _occ_remove(pos, occ_rec, occ_nxt, occ_prv, rhead, rcount)
            nb = _requeue(rec, rcount, rbucket, bnext, bprev, bucket_head, bmax)
            if nb > max_b:
                max_b = nb
            if l != _EMPTY and occ_rec[l] != _EMPTY:
                r2 = _occ_remove(l, occ_rec, occ_nxt, occ_prv, rhead, rcount)
                nb = _requeue(r2, rcount, rbucket, bnext, bprev, bucket_head, bmax)
                if nb > max_b:
                    max_b = nb
            if occ_rec[q] != _EMPTY:
                r2 = _occ_remove(q, occ_rec, occ_nxt, occ_prv, rhead, rcount)
                nb = _requeue(r2, rcount, rbucket, bnext, bprev, bucket_head, bmax)
                if nb > max_b:
                    max_b = nb

            seq[pos] = new_code
            seq[q] = _EMPTY
            nxt[pos] = r_
            if r_ != _EMPTY:
                prv[r_] = pos
            live -= 1

            # Re-derive counted pair starts over the runs touching the edit.
            ws = l if l != _EMPTY else pos
            if seq[ws] != 0:
                while prv[ws] != _EMPTY and seq[prv[ws]] == seq[ws]:
                    ws = prv[ws]
            we = r_ if r_ != _EMPTY else pos
            if seq[we] != 0:
                while nxt[we] != _EMPTY and seq[nxt[we]] == seq[we]:
                    we = nxt[we]

            w = ws
            prev_counted = False
            prev_sym = np.int64(-2)
            while w != _EMPTY:
                u = seq[w]
                if u != prev_sym:
                    prev_counted = False
                w2 = nxt[w]
                desired = _EMPTY
                if w2 != _EMPTY and u != 0:
                    v = seq[w2]
                    if v != 0 and not (u == v and prev_counted):
                        key2 = (u << _KEY_SHIFT) | v
                        slot = _hash_find(hkeys, key2, hcap)
                        if hkeys[slot] == key2:
                            desired = hvals[slot]
                        else:
                            if n_recs == rcap:
                                rcap *= 2
                                rkey = _grow(rkey, rcap, 0)
                                rcount = _grow(rcount, rcap, 0)
                                rhead = _grow(rhead, rcap, _EMPTY)
                                rbucket = _grow(rbucket, rcap, _EMPTY)
                                bnext = _grow(bnext, rcap, 0)
                                bprev = _grow(bprev, rcap, 0)
                            desired = n_recs
                            rkey[desired] = key2
                            n_recs += 1
                            hkeys[slot] = key2
                            hvals[slot] = desired
                            if n_recs * 4 > hcap * 3:
                                hcap *= 2
                                hkeys, hvals = _rehash(rkey, n_recs, hcap)
                cur = occ_rec[w]
                if cur != desired:
                    if cur != _EMPTY:
                        r2 = _occ_remove(w, occ_rec, occ_nxt, occ_prv, rhead, rcount)
                        nb = _requeue(r2, rcount, rbucket, bnext, bprev, bucket_head, bmax)
                        if nb > max_b:
                            max_b = nb
                    if desired != _EMPTY:
                        _occ_add(w, desired, occ_rec, occ_nxt, occ_prv, rhead, rcount)
                        nb = _requeue(desired, rcount, rbucket, bnext, bprev, bucket_head, bmax)
                        if nb > max_b:
                            max_b = nb
                prev_counted = desired != _EMPTY and w2 != _EMPTY and u == seq[w2]
                prev_sym = u
                if w == we:
                    break
                w = w2

        if n_rules == rules_cap:
            rules_cap *= 2
            new_rules = np.empty((rules_cap, 2), np.int64)
            new_rules[:n_rules] = rules[:n_rules]
            rules = new_rules
        rules[n_rules, 0] = a
        rules[n_rules, 1] = b_sym
        n_rules += 1

    final = np.empty(live, np.int64)
    w = 0
    idx = 0
    while w != _EMPTY:
        final[idx] = seq[w]
        idx += 1
        w = nxt[w]
    return rules[:n_rules].copy(), final


def repair_sequence(
    seq: np.ndarray, first_nonterminal: int, bucket_limit: int = DEFAULT_BUCKET_LIMIT
) -> tuple[np.ndarray, np.ndarray]:
    """Compress *seq*; return ``(rules, final)``.

    ``rules[i]`` holds the two symbols replaced by code ``first_nonterminal + i``;
    rule bodies may reference earlier rules only.  ``final`` is what remains of
    the sequence.  Code ``0`` is treated as an inert delimiter.
    """
    seq = np.ascontiguousarray(seq, dtype=np.int64)
    if len(seq) and (seq.min() < 0 or seq.max() >= first_nonterminal):
        raise DimensionError("sequence codes must lie in [0, first_nonterminal)")
    if first_nonterminal + len(seq) >= (1 << _KEY_SHIFT):
        raise DimensionError("symbol codes would overflow the pair-key packing")
    if bucket_limit < 2:
        raise DimensionError("bucket_limit must be at least 2")
    return _repair_core(seq, first_nonterminal, bucket_limit)
