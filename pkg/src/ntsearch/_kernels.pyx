# cython: language_level=3
"""Compiled step functions for the SMTWTP and LRP adapters.

Each ``*_step`` call performs one FI/BI scan or a whole FD/BD descent and
returns ``(solution, fitness, evals, found_at)`` exactly as
:func:`ntsearch.core.apply_step` would for the same adapter, random stream
and budget.  Moves are addressed by the same block layout as the Python
adapters; shuffled scans draw one bounded integer per examined move.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.stdint cimport int64_t, uint64_t
from libc.stdlib cimport free, malloc, realloc
from libc.string cimport memcpy, memset
from numpy.random cimport bitgen_t

cdef extern from *:
    ctypedef unsigned long long u128 "__uint128_t"

cdef enum:
    KIND_FI = 0
    KIND_BI = 1
    KIND_FD = 2
    KIND_BD = 3


# ---------------------------------------------------------------- random

cdef inline uint64_t randbelow(bitgen_t *bg, uint64_t n) noexcept:
    cdef uint64_t x = bg.next_uint64(bg.state)
    cdef u128 m = <u128>x * <u128>n
    cdef uint64_t low = <uint64_t>m
    cdef uint64_t threshold
    if low < n:
        threshold = (<uint64_t>0 - n) % n
        while low < threshold:
            x = bg.next_uint64(bg.state)
            m = <u128>x * <u128>n
            low = <uint64_t>m
    return <uint64_t>(m >> 64)


cdef bitgen_t *as_bitgen(object capsule) except NULL:
    return <bitgen_t *>PyCapsule_GetPointer(capsule, "BitGenerator")


def randbelow_py(object capsule, uint64_t n):
    """Expose the bounded draw for cross-checking against ``Rng.randbelow``."""
    return randbelow(as_bitgen(capsule), n)


# lazy Fisher-Yates workspace; entries are valid only when stamp == gen
cdef int64_t *ws_val = NULL
cdef uint64_t *ws_stamp = NULL
cdef int64_t ws_cap = 0
cdef uint64_t ws_gen = 0


cdef int ws_begin(int64_t m) except -1:
    global ws_val, ws_stamp, ws_cap, ws_gen
    cdef int64_t *nv
    cdef uint64_t *ns
    if m > ws_cap:
        nv = <int64_t *>realloc(ws_val, m * sizeof(int64_t))
        if nv == NULL:
            raise MemoryError()
        ws_val = nv
        ns = <uint64_t *>realloc(ws_stamp, m * sizeof(uint64_t))
        if ns == NULL:
            raise MemoryError()
        ws_stamp = ns
        memset(ws_stamp + ws_cap, 0, (m - ws_cap) * sizeof(uint64_t))
        ws_cap = m
    ws_gen += 1
    return 0


cdef inline int64_t ws_next(bitgen_t *bg, int64_t t, int64_t m) noexcept:
    cdef int64_t j = t + <int64_t>randbelow(bg, <uint64_t>(m - t))
    cdef int64_t vj = ws_val[j] if ws_stamp[j] == ws_gen else j
    cdef int64_t vt = ws_val[t] if ws_stamp[t] == ws_gen else t
    ws_val[j] = vt
    ws_stamp[j] = ws_gen
    return vj


def permutation_prefix(object capsule, int64_t m, int64_t count):
    """First ``count`` items of the lazy shuffle of ``range(m)`` (testing aid)."""
    cdef bitgen_t *bg = as_bitgen(capsule)
    cdef int64_t t
    ws_begin(m)
    return [ws_next(bg, t, m) for t in range(min(count, m))]


# ---------------------------------------------------------------- SMTWTP

cdef enum:
    SM_EXCHANGE = 1
    SM_SWAP = 2
    SM_INSERT = 3
    MAX_NIDS = 64

cdef struct SmCtx:
    int64_t n
    const int64_t *p
    const int64_t *w
    const int64_t *d
    int64_t *cur
    int64_t *pc
    int64_t *pf
    int64_t fcur
    int nn
    int nids[MAX_NIDS]
    int64_t ends[MAX_NIDS]
    int64_t total


cdef void sm_prefix(SmCtx *c) noexcept:
    cdef int64_t i, job, time = 0, cost = 0, late
    for i in range(c.n):
        job = c.cur[i]
        time += c.p[job]
        late = time - c.d[job]
        if late > 0:
            cost += c.w[job] * late
        c.pc[i] = time
        c.pf[i] = cost
    c.fcur = c.pf[c.n - 1] if c.n > 0 else 0


cdef int64_t sm_count(int nid, int64_t n) noexcept:
    if n < 2:
        return 0
    if nid == SM_EXCHANGE:
        return n - 1
    if nid == SM_SWAP:
        return n * (n - 1) // 2
    return n * (n - 1)


# decoded move: mk 0 = exchange positions (x < y), mk 1 = move job at x to index y
cdef void sm_decode(SmCtx *c, int64_t idx, int *mk, int64_t *x, int64_t *y) noexcept:
    cdef int b = 0
    cdef int64_t q, row, a, tt, n = c.n
    while c.ends[b] <= idx:
        b += 1
    q = idx - (c.ends[b - 1] if b > 0 else 0)
    if c.nids[b] == SM_EXCHANGE:
        mk[0] = 0
        x[0] = q
        y[0] = q + 1
    elif c.nids[b] == SM_SWAP:
        a = 0
        row = n - 1
        while q >= row:
            q -= row
            a += 1
            row -= 1
        mk[0] = 0
        x[0] = a
        y[0] = a + 1 + q
    else:
        a = q // (n - 1)
        tt = q % (n - 1)
        mk[0] = 1
        x[0] = a
        y[0] = tt + 1 if tt >= a else tt


cdef inline void sm_acc(SmCtx *c, int64_t job, int64_t *time, int64_t *cost) noexcept:
    cdef int64_t late
    time[0] += c.p[job]
    late = time[0] - c.d[job]
    if late > 0:
        cost[0] += c.w[job] * late


cdef int64_t sm_eval(SmCtx *c, int mk, int64_t x, int64_t y) noexcept:
    # jobs outside the touched window keep their completion times
    cdef int64_t a, b, k, time, cost
    if mk == 0:
        a = x
        b = y
    elif x < y:
        a = x
        b = y
    else:
        a = y
        b = x
    time = c.pc[a - 1] if a > 0 else 0
    cost = c.pf[a - 1] if a > 0 else 0
    if mk == 0:
        sm_acc(c, c.cur[b], &time, &cost)
        for k in range(a + 1, b):
            sm_acc(c, c.cur[k], &time, &cost)
        sm_acc(c, c.cur[a], &time, &cost)
    elif x < y:
        for k in range(x + 1, y + 1):
            sm_acc(c, c.cur[k], &time, &cost)
        sm_acc(c, c.cur[x], &time, &cost)
    else:
        sm_acc(c, c.cur[x], &time, &cost)
        for k in range(y, x):
            sm_acc(c, c.cur[k], &time, &cost)
    return cost + (c.fcur - c.pf[b])


cdef void sm_apply(SmCtx *c, int mk, int64_t x, int64_t y) noexcept:
    cdef int64_t tmp, k
    if mk == 0:
        tmp = c.cur[x]
        c.cur[x] = c.cur[y]
        c.cur[y] = tmp
    elif x < y:
        tmp = c.cur[x]
        for k in range(x, y):
            c.cur[k] = c.cur[k + 1]
        c.cur[y] = tmp
    else:
        tmp = c.cur[x]
        k = x
        while k > y:
            c.cur[k] = c.cur[k - 1]
            k -= 1
        c.cur[y] = tmp
    sm_prefix(c)


cdef int sm_scan(SmCtx *c, bint first, bitgen_t *bg, int64_t budget,
                 int64_t *evals, int64_t *best_idx, int64_t *best_f, int64_t *at) except -1:
    cdef int64_t t, idx, f, x, y, m = c.total
    cdef int mk
    evals[0] = 0
    best_idx[0] = -1
    at[0] = 0
    if first:
        ws_begin(m)
    for t in range(m):
        idx = ws_next(bg, t, m) if first else t
        sm_decode(c, idx, &mk, &x, &y)
        f = sm_eval(c, mk, x, y)
        evals[0] += 1
        if first:
            if f < c.fcur:
                best_idx[0] = idx
                best_f[0] = f
                at[0] = evals[0]
                return 0
        elif best_idx[0] < 0 or f < best_f[0]:
            best_idx[0] = idx
            best_f[0] = f
            at[0] = evals[0]
        if evals[0] >= budget:
            break
    return 0


cdef tuple sm_tuple(SmCtx *c):
    return tuple([c.cur[i] for i in range(c.n)])


def smtwtp_step(tuple perm, const int64_t[::1] p, const int64_t[::1] w, const int64_t[::1] d,
                tuple nids, int kind, object capsule, int64_t budget, object fitness):
    cdef SmCtx c
    cdef bitgen_t *bg = as_bitgen(capsule)
    cdef int64_t n = len(perm), i, acc = 0
    cdef int64_t evals = 0, e = 0, best_idx, best_f = 0, at = 0, found = 0, x, y
    cdef int mk
    cdef bint first = kind == KIND_FI or kind == KIND_FD
    cdef bint descent = kind == KIND_FD or kind == KIND_BD
    cdef bint changed = False
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if len(nids) > MAX_NIDS:
        raise ValueError("too many neighborhoods in one step")
    c.n = n
    c.p = &p[0]
    c.w = &w[0]
    c.d = &d[0]
    c.nn = len(nids)
    for i in range(c.nn):
        c.nids[i] = nids[i]
        if c.nids[i] < 1 or c.nids[i] > 3:
            raise ValueError(f"neighborhood id {c.nids[i]} outside 1..3")
        acc += sm_count(c.nids[i], n)
        c.ends[i] = acc
    c.total = acc
    if acc == 0:
        return perm, fitness, 0, 0
    c.cur = <int64_t *>malloc(3 * n * sizeof(int64_t))
    if c.cur == NULL:
        raise MemoryError()
    c.pc = c.cur + n
    c.pf = c.cur + 2 * n
    try:
        for i in range(n):
            c.cur[i] = perm[i]
        sm_prefix(&c)
        if not descent:
            sm_scan(&c, first, bg, budget, &evals, &best_idx, &best_f, &at)
            if best_idx < 0:
                return perm, fitness, evals, 0
            sm_decode(&c, best_idx, &mk, &x, &y)
            sm_apply(&c, mk, x, y)
            return sm_tuple(&c), best_f, evals, at
        while evals < budget:
            sm_scan(&c, first, bg, budget - evals, &e, &best_idx, &best_f, &at)
            if best_idx >= 0 and best_f < c.fcur:
                found = evals + at
                sm_decode(&c, best_idx, &mk, &x, &y)
                sm_apply(&c, mk, x, y)
                changed = True
                evals += e
            else:
                evals += e
                break
        if not changed:
            return perm, fitness, evals, 0
        return sm_tuple(&c), c.fcur, evals, found
    finally:
        free(c.cur)


# ---------------------------------------------------------------- LRP

cdef struct LrCtx:
    int n
    int m
    int N
    const double *demand
    const double *cap
    const double *opening
    const double *travel
    double alpha
    int *buf          # route j occupies buf[j*n : j*n + n]
    int *rlen
    int *scratch      # two rows of n
    int *slen
    int **vptr        # evaluation view
    int *vlen
    int nblocks
    int64_t *ends
    int *bnid
    int *bj
    int *bj2
    int *open_ids
    int *closed_ids
    int nopen
    int nclosed
    double fcur


cdef double lr_eval(LrCtx *c) noexcept:
    cdef double cost = 0.0, pen = 0.0, q
    cdef int j, k, prev, cl, L
    cdef int *r
    for j in range(c.m):
        L = c.vlen[j]
        if L > 0:
            r = c.vptr[j]
            cost += c.opening[j]
            prev = c.n + j
            for k in range(L):
                cl = r[k]
                cost += c.travel[prev * c.N + cl]
                prev = cl
            cost += c.travel[prev * c.N + c.n + j]
    for j in range(c.m):
        q = 0.0
        r = c.vptr[j]
        for k in range(c.vlen[j]):
            q += c.demand[r[k]]
        if q > c.cap[j]:
            pen += c.alpha * (q - c.cap[j])
    return cost + pen


cdef inline int64_t tri(int64_t r) noexcept:
    return r * (r - 1) // 2 if r > 1 else 0


cdef int64_t bone_intra(int64_t r) noexcept:
    cdef int64_t L, s = 0
    for L in range(2, r):
        s += (r - L + 1) * (r - L)
    return s


cdef int64_t bone_starts(int64_t r) noexcept:
    cdef int64_t L, s = 0
    for L in range(2, r):
        s += r - L + 1
    return s


cdef void lr_layout(LrCtx *c, tuple nids) noexcept:
    cdef int b = 0, nid, j, j2, i
    cdef int64_t acc = 0, cnt, r, r2
    c.nopen = 0
    c.nclosed = 0
    for j in range(c.m):
        if c.rlen[j] > 0:
            c.open_ids[c.nopen] = j
            c.nopen += 1
        else:
            c.closed_ids[c.nclosed] = j
            c.nclosed += 1
    for i in range(len(nids)):
        nid = nids[i]
        if nid == 1 or nid == 3 or nid == 5 or nid == 7 or nid == 9:
            for j in range(c.m):
                r = c.rlen[j]
                if nid == 1:
                    cnt = r * (r - 1)
                elif nid == 3 or nid == 5:
                    cnt = tri(r)
                else:
                    cnt = bone_intra(r)
                acc += cnt
                c.ends[b] = acc
                c.bnid[b] = nid
                c.bj[b] = j
                c.bj2[b] = -1
                b += 1
        elif nid == 2 or nid == 8 or nid == 10:
            for j in range(c.m):
                for j2 in range(c.m):
                    if j2 == j:
                        continue
                    r = c.rlen[j]
                    r2 = c.rlen[j2]
                    if nid == 2:
                        cnt = r * (r2 + 1)
                    else:
                        cnt = bone_starts(r) * (r2 + 1)
                    acc += cnt
                    c.ends[b] = acc
                    c.bnid[b] = nid
                    c.bj[b] = j
                    c.bj2[b] = j2
                    b += 1
        elif nid == 4 or nid == 6:
            for j in range(c.m):
                for j2 in range(j + 1, c.m):
                    r = c.rlen[j]
                    r2 = c.rlen[j2]
                    if nid == 4:
                        cnt = r * r2
                    else:
                        cnt = (r + 1) * (r2 + 1) - 1
                    acc += cnt
                    c.ends[b] = acc
                    c.bnid[b] = nid
                    c.bj[b] = j
                    c.bj2[b] = j2
                    b += 1
        else:
            acc += c.nopen * c.nclosed
            c.ends[b] = acc
            c.bnid[b] = 11
            c.bj[b] = -1
            c.bj2[b] = -1
            b += 1
    c.nblocks = b


cdef int find_block(LrCtx *c, int64_t idx) noexcept:
    cdef int lo = 0, hi = c.nblocks, mid
    while lo < hi:
        mid = (lo + hi) // 2
        if c.ends[mid] <= idx:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline void copy_skip(int *dst, int *src, int r, int start, int length) noexcept:
    # dst = src without src[start:start+length]
    memcpy(dst, src, start * sizeof(int))
    memcpy(dst + start, src + start + length, (r - start - length) * sizeof(int))


cdef inline void put_seg(int *dst, int *seg, int length, bint rev) noexcept:
    cdef int k
    if rev:
        for k in range(length):
            dst[k] = seg[length - 1 - k]
    else:
        memcpy(dst, seg, length * sizeof(int))


cdef void lr_materialize(LrCtx *c, int64_t idx, int *j_out, int *j2_out) noexcept:
    """Write the neighbor's changed routes to scratch and point the view at them."""
    cdef int b = find_block(c, idx)
    cdef int64_t q = idx - (c.ends[b - 1] if b > 0 else 0)
    cdef int nid = c.bnid[b], j = c.bj[b], j2 = c.bj2[b]
    cdef int r, r2, i, t, tt, a, bb, L, k, row
    cdef int64_t cnt
    cdef int *R
    cdef int *R2
    cdef int *s0 = c.scratch
    cdef int *s1 = c.scratch + c.n
    cdef bint rev = nid == 9 or nid == 10
    if nid == 11:
        j = c.open_ids[q // c.nclosed]
        j2 = c.closed_ids[q % c.nclosed]
        memcpy(s1, c.buf + j * c.n, c.rlen[j] * sizeof(int))
        c.slen[0] = 0
        c.slen[1] = c.rlen[j]
        c.vptr[j] = s0
        c.vlen[j] = 0
        c.vptr[j2] = s1
        c.vlen[j2] = c.rlen[j]
        j_out[0] = j
        j2_out[0] = j2
        return
    R = c.buf + j * c.n
    r = c.rlen[j]
    if j2 >= 0:
        R2 = c.buf + j2 * c.n
        r2 = c.rlen[j2]
    if nid == 1:
        i = <int>(q // (r - 1))
        tt = <int>(q % (r - 1))
        t = tt + 1 if tt >= i else tt
        copy_skip(s1, R, r, i, 1)
        memcpy(s0, s1, t * sizeof(int))
        s0[t] = R[i]
        memcpy(s0 + t + 1, s1 + t, (r - 1 - t) * sizeof(int))
        c.slen[0] = r
    elif nid == 3 or nid == 5:
        a = 0
        row = r - 1
        while q >= row:
            q -= row
            a += 1
            row -= 1
        bb = a + 1 + <int>q
        memcpy(s0, R, r * sizeof(int))
        if nid == 3:
            s0[a] = R[bb]
            s0[bb] = R[a]
        else:
            for k in range(a, bb + 1):
                s0[k] = R[a + bb - k]
        c.slen[0] = r
    elif nid == 7 or nid == 9:
        L = 2
        cnt = (r - L + 1) * (r - L)
        while q >= cnt:
            q -= cnt
            L += 1
            cnt = (r - L + 1) * (r - L)
        i = <int>(q // (r - L))
        tt = <int>(q % (r - L))
        t = tt + 1 if tt >= i else tt
        copy_skip(s1, R, r, i, L)
        memcpy(s0, s1, t * sizeof(int))
        put_seg(s0 + t, R + i, L, rev)
        memcpy(s0 + t + L, s1 + t, (r - L - t) * sizeof(int))
        c.slen[0] = r
    elif nid == 2:
        i = <int>(q // (r2 + 1))
        t = <int>(q % (r2 + 1))
        copy_skip(s0, R, r, i, 1)
        c.slen[0] = r - 1
        memcpy(s1, R2, t * sizeof(int))
        s1[t] = R[i]
        memcpy(s1 + t + 1, R2 + t, (r2 - t) * sizeof(int))
        c.slen[1] = r2 + 1
    elif nid == 8 or nid == 10:
        L = 2
        cnt = (r - L + 1) * (r2 + 1)
        while q >= cnt:
            q -= cnt
            L += 1
            cnt = (r - L + 1) * (r2 + 1)
        i = <int>(q // (r2 + 1))
        t = <int>(q % (r2 + 1))
        copy_skip(s0, R, r, i, L)
        c.slen[0] = r - L
        memcpy(s1, R2, t * sizeof(int))
        put_seg(s1 + t, R + i, L, rev)
        memcpy(s1 + t + L, R2 + t, (r2 - t) * sizeof(int))
        c.slen[1] = r2 + L
    elif nid == 4:
        a = <int>(q // r2)
        bb = <int>(q % r2)
        memcpy(s0, R, r * sizeof(int))
        memcpy(s1, R2, r2 * sizeof(int))
        s0[a] = R2[bb]
        s1[bb] = R[a]
        c.slen[0] = r
        c.slen[1] = r2
    else:  # nid == 6, tail exchange
        a = <int>(q // (r2 + 1))
        bb = <int>(q % (r2 + 1))
        memcpy(s0, R, a * sizeof(int))
        memcpy(s0 + a, R2 + bb, (r2 - bb) * sizeof(int))
        c.slen[0] = a + r2 - bb
        memcpy(s1, R2, bb * sizeof(int))
        memcpy(s1 + bb, R + a, (r - a) * sizeof(int))
        c.slen[1] = bb + r - a
    c.vptr[j] = s0
    c.vlen[j] = c.slen[0]
    if j2 >= 0:
        c.vptr[j2] = s1
        c.vlen[j2] = c.slen[1]
    j_out[0] = j
    j2_out[0] = j2


cdef inline void lr_restore(LrCtx *c, int j, int j2) noexcept:
    c.vptr[j] = c.buf + j * c.n
    c.vlen[j] = c.rlen[j]
    if j2 >= 0:
        c.vptr[j2] = c.buf + j2 * c.n
        c.vlen[j2] = c.rlen[j2]


cdef void lr_commit(LrCtx *c, int64_t idx, tuple nids) noexcept:
    cdef int j, j2
    lr_materialize(c, idx, &j, &j2)
    memcpy(c.buf + j * c.n, c.vptr[j], c.vlen[j] * sizeof(int))
    c.rlen[j] = c.vlen[j]
    if j2 >= 0:
        memcpy(c.buf + j2 * c.n, c.vptr[j2], c.vlen[j2] * sizeof(int))
        c.rlen[j2] = c.vlen[j2]
    lr_restore(c, j, j2)
    lr_layout(c, nids)


cdef int lr_scan(LrCtx *c, bint first, bitgen_t *bg, int64_t budget,
                 int64_t *evals, int64_t *best_idx, double *best_f, int64_t *at) except -1:
    cdef int64_t t, idx, m = c.ends[c.nblocks - 1] if c.nblocks > 0 else 0
    cdef double f
    cdef int j, j2
    evals[0] = 0
    best_idx[0] = -1
    at[0] = 0
    if first:
        ws_begin(m)
    for t in range(m):
        idx = ws_next(bg, t, m) if first else t
        lr_materialize(c, idx, &j, &j2)
        f = lr_eval(c)
        lr_restore(c, j, j2)
        evals[0] += 1
        if first:
            if f < c.fcur:
                best_idx[0] = idx
                best_f[0] = f
                at[0] = evals[0]
                return 0
        elif best_idx[0] < 0 or f < best_f[0]:
            best_idx[0] = idx
            best_f[0] = f
            at[0] = evals[0]
        if evals[0] >= budget:
            break
    return 0


cdef tuple lr_tuple(LrCtx *c):
    cdef int j, k
    return tuple([tuple([c.buf[j * c.n + k] for k in range(c.rlen[j])]) for j in range(c.m)])


def lrp_step(tuple routes, const double[::1] demand, const double[::1] cap,
             const double[::1] opening, const double[:, ::1] travel, double alpha,
             tuple nids, int kind, object capsule, int64_t budget, double fitness):
    cdef LrCtx c
    cdef bitgen_t *bg = as_bitgen(capsule)
    cdef int j, k, n = demand.shape[0], m = cap.shape[0]
    cdef int64_t evals = 0, e = 0, best_idx, at = 0, found = 0, total
    cdef double best_f = 0.0
    cdef bint first = kind == KIND_FI or kind == KIND_FD
    cdef bint descent = kind == KIND_FD or kind == KIND_BD
    cdef bint changed = False
    cdef int maxblocks = len(nids) * (m * m + 1)
    cdef tuple route
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if len(routes) != m:
        raise ValueError("routes must have one entry per depot")
    for nid in nids:
        if nid < 1 or nid > 11:
            raise ValueError(f"neighborhood id {nid} outside 1..11")
    c.n = n
    c.m = m
    c.N = n + m
    c.demand = &demand[0]
    c.cap = &cap[0]
    c.opening = &opening[0]
    c.travel = &travel[0, 0]
    c.alpha = alpha
    c.buf = <int *>malloc((m * n + 2 * n + 3 * m + 4 * maxblocks) * sizeof(int))
    c.vptr = <int **>malloc(m * sizeof(int *))
    c.ends = <int64_t *>malloc(maxblocks * sizeof(int64_t))
    if c.buf == NULL or c.vptr == NULL or c.ends == NULL:
        free(c.buf)
        free(c.vptr)
        free(c.ends)
        raise MemoryError()
    c.scratch = c.buf + m * n
    c.rlen = c.scratch + 2 * n
    c.vlen = c.rlen + m
    c.open_ids = c.vlen + m
    c.closed_ids = c.open_ids + m
    c.bnid = c.closed_ids + m
    c.bj = c.bnid + maxblocks
    c.bj2 = c.bj + maxblocks
    c.slen = c.bj2 + maxblocks
    try:
        for j in range(m):
            route = routes[j]
            c.rlen[j] = len(route)
            for k in range(c.rlen[j]):
                c.buf[j * n + k] = route[k]
            c.vptr[j] = c.buf + j * n
            c.vlen[j] = c.rlen[j]
        c.fcur = fitness
        lr_layout(&c, nids)
        total = c.ends[c.nblocks - 1] if c.nblocks > 0 else 0
        if total == 0:
            return routes, fitness, 0, 0
        if not descent:
            lr_scan(&c, first, bg, budget, &evals, &best_idx, &best_f, &at)
            if best_idx < 0:
                return routes, fitness, evals, 0
            lr_commit(&c, best_idx, nids)
            return lr_tuple(&c), best_f, evals, at
        while evals < budget:
            lr_scan(&c, first, bg, budget - evals, &e, &best_idx, &best_f, &at)
            if best_idx >= 0 and best_f < c.fcur:
                found = evals + at
                lr_commit(&c, best_idx, nids)
                c.fcur = best_f
                changed = True
                evals += e
            else:
                evals += e
                break
        if not changed:
            return routes, fitness, evals, 0
        return lr_tuple(&c), c.fcur, evals, found
    finally:
        free(c.buf)
        free(c.vptr)
        free(c.ends)
