# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled execution core.

Reproduces the reference engine (macsim.engine) bit-for-bit for randomized
and randomized-individual adversaries: identical RNG consumption (uniform
doubles from the same PCG64 substreams), identical bucket arithmetic,
identical stage metrics.  Scripted strategies, traces, preloads and round
logs stay on the pure path.  tests/test_kernel_equivalence.py pins the
match.
"""

from cpython.mem cimport PyMem_Free, PyMem_Malloc
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport exp
from libc.string cimport memmove

from numpy.random cimport bitgen_t

KERNEL_VERSION = 1

cdef long POISSON_CUTOFF = 512

cdef int EV_SILENCE = 0
cdef int EV_HEARD = 1
cdef int EV_COLLISION = 2

# Algorithm ids (match macsim.dispatch.ALGORITHM_IDS).
cdef int A_RRW = 0
cdef int A_OF_RRW = 1
cdef int A_SRR = 2
cdef int A_OF_SRR = 3
cdef int A_MBTF = 4
cdef int A_CB = 5
cdef int A_QR = 6
cdef int A_QB = 7
cdef int A_BEB = 8
cdef int A_BEB_CAP = 9
cdef int A_QBO = 10
cdef int A_QBO_CAP = 11


# -- RNG helpers (consume uniforms exactly like macsim.rng.Stream) -------------

cdef inline double u01(bitgen_t *rng) noexcept nogil:
    return rng.next_double(rng.state)


cdef inline long draw_randint(bitgen_t *rng, long k) noexcept nogil:
    cdef long i = <long>(u01(rng) * k)
    return k - 1 if i >= k else i


cdef inline long draw_poisson(bitgen_t *rng, double lam) noexcept nogil:
    cdef double u = u01(rng)
    cdef double p = exp(-lam)
    cdef double f = p
    cdef long x = 0
    while u > f and x < POISSON_CUTOFF:
        x += 1
        p = p * (lam / x)
        f = f + p
    return x


# -- per-station packet queue (ring buffer of (pid, injected round)) -----------

cdef struct Ring:
    long long *pid
    long long *rnd
    long cap
    long head
    long size


cdef int ring_init(Ring *r, long cap) except -1:
    r.pid = <long long *> PyMem_Malloc(cap * sizeof(long long))
    r.rnd = <long long *> PyMem_Malloc(cap * sizeof(long long))
    if r.pid == NULL or r.rnd == NULL:
        raise MemoryError()
    r.cap = cap
    r.head = 0
    r.size = 0
    return 0


cdef void ring_free(Ring *r) noexcept:
    PyMem_Free(r.pid)
    PyMem_Free(r.rnd)


cdef int ring_push(Ring *r, long long pid, long long rnd) except -1:
    cdef long long *np
    cdef long long *nr
    cdef long i, idx
    if r.size == r.cap:
        np = <long long *> PyMem_Malloc(2 * r.cap * sizeof(long long))
        nr = <long long *> PyMem_Malloc(2 * r.cap * sizeof(long long))
        if np == NULL or nr == NULL:
            raise MemoryError()
        for i in range(r.size):
            idx = (r.head + i) % r.cap
            np[i] = r.pid[idx]
            nr[i] = r.rnd[idx]
        PyMem_Free(r.pid)
        PyMem_Free(r.rnd)
        r.pid = np
        r.rnd = nr
        r.cap = 2 * r.cap
        r.head = 0
    idx = (r.head + r.size) % r.cap
    r.pid[idx] = pid
    r.rnd[idx] = rnd
    r.size += 1
    return 0


cdef inline void ring_pop(Ring *r, long long *pid, long long *rnd) noexcept nogil:
    pid[0] = r.pid[r.head]
    rnd[0] = r.rnd[r.head]
    r.head = (r.head + 1) % r.cap
    r.size -= 1


cdef inline long long ring_head_round(Ring *r) noexcept nogil:
    return r.rnd[r.head]


# -- Fenwick tree over station-eligibility bits (for SRR) ----------------------

cdef struct Fenwick:
    long *tree
    long n


cdef int fen_init(Fenwick *f, long n) except -1:
    f.tree = <long *> PyMem_Malloc((n + 1) * sizeof(long))
    if f.tree == NULL:
        raise MemoryError()
    f.n = n
    cdef long i
    for i in range(n + 1):
        f.tree[i] = 0
    return 0


cdef void fen_free(Fenwick *f) noexcept:
    PyMem_Free(f.tree)


cdef inline void fen_add(Fenwick *f, long i, long delta) noexcept nogil:
    i += 1
    while i <= f.n:
        f.tree[i] += delta
        i += i & (-i)


cdef inline long fen_prefix(Fenwick *f, long i) noexcept nogil:
    cdef long s = 0
    while i > 0:
        s += f.tree[i]
        i -= i & (-i)
    return s


cdef inline long fen_range(Fenwick *f, long lo, long hi) noexcept nogil:
    return fen_prefix(f, hi) - fen_prefix(f, lo)


cdef long fen_kth(Fenwick *f, long k) noexcept nogil:
    # smallest 0-based index whose prefix sum reaches k (1-based k)
    cdef long pos = 0
    cdef long bit = 1
    while bit * 2 <= f.n:
        bit *= 2
    while bit > 0:
        if pos + bit <= f.n and f.tree[pos + bit] < k:
            pos += bit
            k -= f.tree[pos]
        bit >>= 1
    return pos


# -- binary min-heap of (round, station) for backoff schedules ------------------

cdef struct Heap:
    long long *rnd
    long *station
    long size
    long cap


cdef int heap_init(Heap *h, long cap) except -1:
    h.rnd = <long long *> PyMem_Malloc(cap * sizeof(long long))
    h.station = <long *> PyMem_Malloc(cap * sizeof(long))
    if h.rnd == NULL or h.station == NULL:
        raise MemoryError()
    h.size = 0
    h.cap = cap
    return 0


cdef void heap_free(Heap *h) noexcept:
    PyMem_Free(h.rnd)
    PyMem_Free(h.station)


cdef void heap_push(Heap *h, long long rnd, long station) noexcept nogil:
    cdef long i = h.size
    cdef long parent
    h.size += 1
    while i > 0:
        parent = (i - 1) >> 1
        if h.rnd[parent] <= rnd:
            break
        h.rnd[i] = h.rnd[parent]
        h.station[i] = h.station[parent]
        i = parent
    h.rnd[i] = rnd
    h.station[i] = station


cdef long heap_pop(Heap *h) noexcept nogil:
    cdef long out = h.station[0]
    cdef long long key
    cdef long stn, i, child
    h.size -= 1
    if h.size == 0:
        return out
    key = h.rnd[h.size]
    stn = h.station[h.size]
    i = 0
    while True:
        child = 2 * i + 1
        if child >= h.size:
            break
        if child + 1 < h.size and h.rnd[child + 1] < h.rnd[child]:
            child += 1
        if h.rnd[child] >= key:
            break
        h.rnd[i] = h.rnd[child]
        h.station[i] = h.station[child]
        i = child
    h.rnd[i] = key
    h.station[i] = stn
    return out


cdef long add_count(long *stations, long *counts, long entries, long s) noexcept nogil:
    cdef long i
    for i in range(entries):
        if stations[i] == s:
            counts[i] += 1
            return entries
    stations[entries] = s
    counts[entries] = 1
    return entries + 1


cdef void sort_pairs(long *stations, long *counts, long entries) noexcept nogil:
    cdef long i, j, s, c
    for i in range(1, entries):
        s = stations[i]
        c = counts[i]
        j = i - 1
        while j >= 0 and stations[j] > s:
            stations[j + 1] = stations[j]
            counts[j + 1] = counts[j]
            j -= 1
        stations[j + 1] = s
        counts[j + 1] = c


cdef class KernelRun:
    cdef long n
    cdef int algo
    cdef int cd
    cdef double rho
    cdef double beta
    cdef int individual
    cdef int check_invariants

    # adversary
    cdef bitgen_t *adv_rng
    cdef object adv_bitgen
    cdef double bucket_level
    cdef double *st_bucket
    cdef double *rates
    cdef long *shuffle_buf

    # per-station streams (backoff)
    cdef bitgen_t **st_rng
    cdef object st_bitgens

    # queues and active set
    cdef Ring *rings
    cdef long *active_arr
    cdef long active_count
    cdef unsigned char *is_active

    # next-round transmission state
    cdef long ntx
    cdef long tx_station
    cdef int tx_over
    cdef int tx_joiner
    cdef int tx_big
    cdef long long tx_q
    cdef long *tx_list
    cdef long tx_list_len

    # rrw / of-rrw / srr / of-srr
    cdef long token
    cdef long *old_count
    cdef long leaves
    cdef long *stk_lo
    cdef long *stk_hi
    cdef long stk_len
    cdef int lock
    cdef long lock_station
    cdef Fenwick fen

    # mbtf
    cdef long *order
    cdef long cursor

    # counting-backoff
    cdef long *stack
    cdef long stack_len
    cdef int repaired
    cdef long newcomer_fly   # transmits this round
    cdef long newcomer_next  # activated this round, transmits next

    # quadruple-round
    cdef long long seg
    cdef int processing
    cdef long seg_station[4]
    cdef long long *act_round

    # queue-backoff
    cdef long long *absp
    cdef unsigned char *positioned
    cdef long positioned_count
    cdef long long front_counter
    cdef long long q_msg
    cdef long *by_absp
    cdef long *joiner_voids     # >= 0: pending joiner's observed voids
    cdef long *txj              # joiners transmitting this round
    cdef long txj_len
    cdef long *new_joiners      # activated this round, transmit next
    cdef long new_joiners_len

    # backoff
    cdef Heap heap
    cdef long *attempts
    cdef int window_cap
    cdef int quadratic

    # counters / metrics
    cdef long long t
    cdef long long next_pid
    cdef long long injected
    cdef long long delivered
    cdef long long total_queued
    cdef long long max_delay
    cdef long long max_total_queue

    # stage ledger
    cdef long long ledger_k
    cdef long stage_cap
    cdef long long round_cap
    cdef long long batch_lo
    cdef long long delivered_marked
    cdef long long delay_sum
    cdef list averages
    cdef object verdict
    cdef object value

    def __cinit__(self):
        self.rings = NULL

    def __dealloc__(self):
        cdef long i
        if self.rings != NULL:
            for i in range(self.n):
                ring_free(&self.rings[i])
            PyMem_Free(self.rings)
        PyMem_Free(self.active_arr)
        PyMem_Free(self.is_active)
        PyMem_Free(self.old_count)
        PyMem_Free(self.stk_lo)
        PyMem_Free(self.stk_hi)
        if self.fen.tree != NULL:
            fen_free(&self.fen)
        PyMem_Free(self.order)
        PyMem_Free(self.stack)
        PyMem_Free(self.act_round)
        PyMem_Free(self.absp)
        PyMem_Free(self.positioned)
        PyMem_Free(self.by_absp)
        PyMem_Free(self.joiner_voids)
        PyMem_Free(self.txj)
        PyMem_Free(self.new_joiners)
        PyMem_Free(self.tx_list)
        PyMem_Free(self.st_bucket)
        PyMem_Free(self.rates)
        PyMem_Free(self.shuffle_buf)
        PyMem_Free(self.st_rng)
        PyMem_Free(self.attempts)
        if self.heap.rnd != NULL:
            heap_free(&self.heap)

    # -- setup ------------------------------------------------------------------

    def setup(self, int algo, long n, int cd, double rho, double beta,
              int individual, list rates, object adv_bitgen, list st_bitgens,
              long long k, long stage_cap, long long round_cap,
              int check_invariants):
        cdef long i
        self.algo = algo
        self.n = n
        self.cd = cd
        self.rho = rho
        self.beta = beta
        self.individual = individual
        self.check_invariants = check_invariants

        self.adv_bitgen = adv_bitgen
        self.adv_rng = <bitgen_t *> PyCapsule_GetPointer(adv_bitgen.capsule, "BitGenerator")
        self.bucket_level = beta

        self.rings = <Ring *> PyMem_Malloc(n * sizeof(Ring))
        for i in range(n):
            ring_init(&self.rings[i], 8)
        self.active_arr = <long *> PyMem_Malloc(n * sizeof(long))
        self.is_active = <unsigned char *> PyMem_Malloc(n)
        for i in range(n):
            self.is_active[i] = 0
        self.active_count = 0

        if individual:
            self.st_bucket = <double *> PyMem_Malloc(n * sizeof(double))
            self.rates = <double *> PyMem_Malloc(n * sizeof(double))
            self.shuffle_buf = <long *> PyMem_Malloc(n * sizeof(long))
            for i in range(n):
                self.st_bucket[i] = beta
                self.rates[i] = <double> rates[i]

        self.st_bitgens = st_bitgens
        if len(st_bitgens) > 0:
            self.st_rng = <bitgen_t **> PyMem_Malloc(n * sizeof(void *))
            for i in range(n):
                self.st_rng[i] = <bitgen_t *> PyCapsule_GetPointer(
                    st_bitgens[i].capsule, "BitGenerator")

        self.ntx = 0
        self.tx_station = -1
        self.tx_list = <long *> PyMem_Malloc((n + 1) * sizeof(long))
        self.tx_list_len = 0

        if algo == A_RRW or algo == A_OF_RRW:
            self.token = 0
            self.old_count = <long *> PyMem_Malloc(n * sizeof(long))
            for i in range(n):
                self.old_count[i] = 0
        elif algo == A_SRR or algo == A_OF_SRR:
            self.leaves = 1
            while self.leaves < n:
                self.leaves *= 2
            self.stk_lo = <long *> PyMem_Malloc(64 * sizeof(long))
            self.stk_hi = <long *> PyMem_Malloc(64 * sizeof(long))
            self.stk_lo[0] = 0
            self.stk_hi[0] = self.leaves
            self.stk_len = 1
            self.lock = 0
            self.lock_station = -1
            fen_init(&self.fen, n)
            self.old_count = <long *> PyMem_Malloc(n * sizeof(long))
            for i in range(n):
                self.old_count[i] = 0
        elif algo == A_MBTF:
            self.order = <long *> PyMem_Malloc(n * sizeof(long))
            for i in range(n):
                self.order[i] = i
            self.cursor = 0
        elif algo == A_CB:
            self.stack = <long *> PyMem_Malloc(n * sizeof(long))
            self.stack_len = 0
            self.repaired = 1
            self.newcomer_fly = -1
            self.newcomer_next = -1
        elif algo == A_QR:
            self.seg = 0
            self.processing = 0
            self.stk_lo = <long *> PyMem_Malloc(16 * sizeof(long))
            self.stk_hi = <long *> PyMem_Malloc(16 * sizeof(long))
            self.stk_len = 0
            self.act_round = <long long *> PyMem_Malloc(n * sizeof(long long))
            for i in range(n):
                self.act_round[i] = -1
            for i in range(4):
                self.seg_station[i] = -1
        elif algo == A_QB:
            self.absp = <long long *> PyMem_Malloc(n * sizeof(long long))
            self.positioned = <unsigned char *> PyMem_Malloc(n)
            self.by_absp = <long *> PyMem_Malloc(n * sizeof(long))
            self.joiner_voids = <long *> PyMem_Malloc(n * sizeof(long))
            self.txj = <long *> PyMem_Malloc(n * sizeof(long))
            self.new_joiners = <long *> PyMem_Malloc(n * sizeof(long))
            for i in range(n):
                self.positioned[i] = 0
                self.joiner_voids[i] = -1
            self.positioned_count = 0
            self.front_counter = 0
            self.q_msg = 0
            self.txj_len = 0
            self.new_joiners_len = 0
        else:
            heap_init(&self.heap, n + 1)
            self.attempts = <long *> PyMem_Malloc(n * sizeof(long))
            self.quadratic = 1 if (algo == A_QBO or algo == A_QBO_CAP) else 0
            if algo == A_BEB_CAP:
                self.window_cap = 10
            elif algo == A_QBO_CAP:
                self.window_cap = 32
            else:
                self.window_cap = 0

        self.t = 0
        self.next_pid = 0
        self.injected = 0
        self.delivered = 0
        self.total_queued = 0
        self.max_delay = 0
        self.max_total_queue = 0

        self.ledger_k = k
        self.stage_cap = stage_cap
        self.round_cap = round_cap
        self.batch_lo = 0
        self.delivered_marked = 0
        self.delay_sum = 0
        self.averages = []
        self.verdict = None
        self.value = None

    # -- active-set maintenance ---------------------------------------------------

    cdef void active_insert(self, long s) noexcept nogil:
        cdef long lo = 0
        cdef long hi = self.active_count
        cdef long mid
        while lo < hi:
            mid = (lo + hi) >> 1
            if self.active_arr[mid] < s:
                lo = mid + 1
            else:
                hi = mid
        memmove(&self.active_arr[lo + 1], &self.active_arr[lo],
                (self.active_count - lo) * sizeof(long))
        self.active_arr[lo] = s
        self.active_count += 1
        self.is_active[s] = 1

    cdef void active_remove(self, long s) noexcept nogil:
        cdef long lo = 0
        cdef long hi = self.active_count
        cdef long mid
        while lo < hi:
            mid = (lo + hi) >> 1
            if self.active_arr[mid] < s:
                lo = mid + 1
            else:
                hi = mid
        memmove(&self.active_arr[lo], &self.active_arr[lo + 1],
                (self.active_count - lo - 1) * sizeof(long))
        self.active_count -= 1
        self.is_active[s] = 0

    # -- stage ledger ----------------------------------------------------------------

    cdef void ledger_delivery(self, long long pid, long long delay):
        cdef double avg, lo, hi
        cdef list window
        if self.ledger_k <= 0 or self.verdict is not None:
            return
        if pid < self.batch_lo or pid >= self.batch_lo + self.ledger_k:
            return
        self.delivered_marked += 1
        self.delay_sum += delay
        if self.delivered_marked == self.ledger_k:
            avg = (<double> self.delay_sum) / (<double> self.ledger_k)
            self.averages.append(avg)
            self.batch_lo = self.injected
            self.delivered_marked = 0
            self.delay_sum = 0
            if len(self.averages) >= 4:
                window = self.averages[len(self.averages) - 4 :]
                lo = min(window)
                hi = max(window)
                if (lo <= 0.0 and hi <= 0.0) or (lo > 0.0 and (hi - lo) / lo < 0.05):
                    self.verdict = "stabilized"
                    self.value = sum(window) / 4
                    return
            if len(self.averages) >= self.stage_cap:
                self.verdict = "unstable"

    # -- adversaries ------------------------------------------------------------------

    cdef long plan_randomized(self, long *inj_station, long *inj_count) except -1:
        cdef long x = draw_poisson(self.adv_rng, self.rho)
        cdef double d = self.bucket_level + self.rho
        if d > self.beta:
            d = self.beta
        cdef long cap = <long> d
        cdef long j = x if x < cap else cap
        self.bucket_level = d - j
        if j == 0:
            return 0
        cdef long virtual = -1
        cdef long idx, s, i, seen
        if self.active_count < self.n:
            idx = draw_randint(self.adv_rng, self.n - self.active_count)
            seen = -1
            for s in range(self.n):
                if not self.is_active[s]:
                    seen += 1
                    if seen == idx:
                        virtual = s
                        break
        cdef long n_eligible = self.active_count + (1 if virtual >= 0 else 0)
        cdef long entries = 0
        for i in range(j):
            idx = draw_randint(self.adv_rng, n_eligible)
            s = self.eligible_at(idx, virtual)
            entries = add_count(inj_station, inj_count, entries, s)
        sort_pairs(inj_station, inj_count, entries)
        return entries

    cdef inline long eligible_at(self, long idx, long virtual) noexcept nogil:
        cdef long lo, hi, mid, before
        if virtual < 0:
            return self.active_arr[idx]
        lo = 0
        hi = self.active_count
        while lo < hi:
            mid = (lo + hi) >> 1
            if self.active_arr[mid] < virtual:
                lo = mid + 1
            else:
                hi = mid
        before = lo
        if idx < before:
            return self.active_arr[idx]
        if idx == before:
            return virtual
        return self.active_arr[idx - 1]

    cdef long plan_individual(self, long *inj_station, long *inj_count) except -1:
        cdef double d = self.bucket_level + self.rho
        if d > self.beta:
            d = self.beta
        cdef long remaining = <long> d
        cdef long i, jj, s, x, g, allowed_passive, cap_s
        cdef double sd
        cdef long n = self.n
        for i in range(n):
            self.shuffle_buf[i] = i
        for i in range(n - 1, 0, -1):
            jj = <long> (u01(self.adv_rng) * (i + 1))
            if jj > i:
                jj = i
            s = self.shuffle_buf[i]
            self.shuffle_buf[i] = self.shuffle_buf[jj]
            self.shuffle_buf[jj] = s
        allowed_passive = -1
        for i in range(n):
            s = self.shuffle_buf[i]
            if not self.is_active[s]:
                allowed_passive = s
                break
        cdef long entries = 0
        cdef long total = 0
        for i in range(n):
            s = self.shuffle_buf[i]
            sd = self.st_bucket[s] + self.rates[s]
            if sd > self.beta:
                sd = self.beta
            if self.rates[s] <= 0.0:
                self.st_bucket[s] = sd
                continue
            x = draw_poisson(self.adv_rng, self.rates[s])
            if (not self.is_active[s]) and s != allowed_passive:
                x = 0
            if x > remaining:
                x = remaining
            cap_s = <long> sd
            g = x if x < cap_s else cap_s
            self.st_bucket[s] = sd - g
            if g > 0:
                entries = add_count(inj_station, inj_count, entries, s)
                inj_count[entries - 1] += g - 1
                total += g
                remaining -= g
        self.bucket_level = d - total
        sort_pairs(inj_station, inj_count, entries)
        return entries

    # -- per-algorithm updates and transmit preparation --------------------------------

    cdef void update_rrw(self, int event):
        cdef long i
        if event != EV_HEARD:
            self.token += 1
            if self.token == self.n:
                self.token = 0
                if self.algo == A_OF_RRW:
                    for i in range(self.n):
                        self.old_count[i] = self.rings[i].size

    cdef void prep_rrw(self):
        cdef long s = self.token
        cdef long elig = self.old_count[s] if self.algo == A_OF_RRW else self.rings[s].size
        self.ntx = 1 if elig > 0 else 0
        self.tx_station = s

    cdef void update_srr(self, int event):
        cdef long lo, hi, mid, i
        if event == EV_HEARD:
            if not self.lock:
                self.lock = 1
                self.lock_station = self.tx_station
        elif event == EV_SILENCE:
            self.lock = 0
            self.lock_station = -1
            self.stk_len -= 1
            if self.stk_len == 0:
                self.stk_lo[0] = 0
                self.stk_hi[0] = self.leaves
                self.stk_len = 1
                if self.algo == A_OF_SRR:
                    for i in range(self.n):
                        if (self.old_count[i] > 0) != (self.rings[i].size > 0):
                            fen_add(&self.fen, i, 1 if self.rings[i].size > 0 else -1)
                        self.old_count[i] = self.rings[i].size
        else:
            lo = self.stk_lo[self.stk_len - 1]
            hi = self.stk_hi[self.stk_len - 1]
            mid = (lo + hi) >> 1
            self.stk_lo[self.stk_len - 1] = mid
            self.stk_hi[self.stk_len - 1] = hi
            self.stk_lo[self.stk_len] = lo
            self.stk_hi[self.stk_len] = mid
            self.stk_len += 1

    cdef void prep_srr(self):
        cdef long lo, hi, cnt, s, elig
        if self.lock:
            s = self.lock_station
            elig = self.old_count[s] if self.algo == A_OF_SRR else self.rings[s].size
            self.ntx = 1 if elig > 0 else 0
            self.tx_station = s
            return
        lo = self.stk_lo[self.stk_len - 1]
        hi = self.stk_hi[self.stk_len - 1]
        if hi > self.n:
            hi = self.n
        if lo >= hi:
            self.ntx = 0
            return
        cnt = fen_range(&self.fen, lo, hi)
        self.ntx = cnt
        if cnt == 1:
            self.tx_station = fen_kth(&self.fen, fen_prefix(&self.fen, lo) + 1)

    cdef void update_mbtf(self, int event):
        cdef long s, idx
        if event == EV_HEARD:
            if self.tx_big:
                s = self.tx_station
                idx = 0
                while self.order[idx] != s:
                    idx += 1
                memmove(&self.order[1], &self.order[0], idx * sizeof(long))
                self.order[0] = s
                self.cursor = 0
        else:
            self.cursor += 1
            if self.cursor == self.n:
                self.cursor = 0

    cdef void prep_mbtf(self):
        cdef long s = self.order[self.cursor]
        self.ntx = 1 if self.rings[s].size > 0 else 0
        self.tx_station = s
        self.tx_big = 1 if self.rings[s].size >= self.n else 0

    cdef void update_cb(self, int event):
        if event == EV_COLLISION:
            self.stack[self.stack_len] = self.newcomer_fly
            self.stack_len += 1
            self.newcomer_fly = -1
        elif event == EV_HEARD:
            if self.tx_station == self.newcomer_fly:
                self.newcomer_fly = -1
                if self.rings[self.tx_station].size > 0:
                    self.stack[self.stack_len] = self.tx_station
                    self.stack_len += 1
                    self.repaired = 1
            else:
                if self.rings[self.tx_station].size == 0:
                    self.stack_len -= 1
                    self.repaired = 0
        else:
            if not self.repaired:
                self.repaired = 1

    cdef void prep_cb(self):
        self.newcomer_fly = self.newcomer_next
        self.newcomer_next = -1
        self.ntx = 0
        if self.stack_len > 0 and self.repaired:
            self.ntx = 1
            self.tx_station = self.stack[self.stack_len - 1]
        if self.newcomer_fly >= 0:
            self.ntx += 1
            if self.ntx == 1:
                self.tx_station = self.newcomer_fly

    cdef void update_qr(self, int event, long long t):
        cdef long lo, hi, mid, k, s
        cdef long long base
        cdef int was_root
        if self.processing:
            lo = self.stk_lo[self.stk_len - 1]
            hi = self.stk_hi[self.stk_len - 1]
            self.stk_len -= 1
            if event == EV_COLLISION:
                mid = (lo + hi) >> 1
                self.stk_lo[self.stk_len] = mid
                self.stk_hi[self.stk_len] = hi
                self.stk_lo[self.stk_len + 1] = lo
                self.stk_hi[self.stk_len + 1] = mid
                self.stk_len += 2
            elif self.stk_len == 0:
                was_root = 1 if (lo == 0 and hi == 4) else 0
                if event == EV_SILENCE and was_root:
                    self.seg += 1
                    self.processing = 0
                else:
                    self.stk_lo[0] = 0
                    self.stk_hi[0] = 4
                    self.stk_len = 1
        if (not self.processing) and t + 1 >= 4 * (self.seg + 1):
            self.processing = 1
            self.stk_lo[0] = 0
            self.stk_hi[0] = 4
            self.stk_len = 1
            base = 4 * self.seg
            for k in range(4):
                self.seg_station[k] = -1
            for s in range(self.n):
                if base <= self.act_round[s] < base + 4 and self.rings[s].size > 0:
                    self.seg_station[self.act_round[s] - base] = s

    cdef void prep_qr(self):
        cdef long lo, hi, k, s, cnt
        cdef long long base
        self.ntx = 0
        if not self.processing:
            return
        lo = self.stk_lo[self.stk_len - 1]
        hi = self.stk_hi[self.stk_len - 1]
        base = 4 * self.seg
        cnt = 0
        for k in range(lo, hi):
            s = self.seg_station[k]
            if s >= 0 and self.act_round[s] == base + k and self.rings[s].size > 0:
                cnt += 1
                self.tx_station = s
        self.ntx = cnt

    cdef void update_qb(self, int event):
        cdef long s, i, tx
        cdef long long p, q_field
        cdef int over
        tx = self.tx_station
        if event == EV_HEARD:
            if self.tx_joiner:
                # A joiner heard alone: the distributed queue was empty.
                self.joiner_voids[tx] = -1
                if self.rings[tx].size > 0:
                    self.positioned[tx] = 1
                    self.absp[tx] = self.front_counter
                    self.by_absp[self.front_counter % self.n] = tx
                    self.positioned_count = 1
                    self.q_msg = 1
                else:
                    self.positioned_count = 0
                    self.q_msg = 0
            else:
                q_field = self.tx_q
                over = self.tx_over
                for s in range(self.n):
                    if self.joiner_voids[s] >= 0:
                        p = q_field - 1 - self.joiner_voids[s]
                        if over:
                            p -= 1
                        self.joiner_voids[s] = -1
                        self.positioned[s] = 1
                        self.absp[s] = p + self.front_counter + (1 if over else 0)
                        self.by_absp[self.absp[s] % self.n] = s
                        self.positioned_count += 1
                if over:
                    self.positioned[tx] = 0
                    self.positioned_count -= 1
                    self.front_counter += 1
                    self.q_msg -= 1
                    if self.rings[tx].size > 0:
                        # Refilled on its over round: rejoins next round.
                        self.new_joiners[self.new_joiners_len] = tx
                        self.new_joiners_len += 1
        else:
            if self.positioned_count > 0:
                self.q_msg += 1
            for s in range(self.n):
                if self.joiner_voids[s] >= 0:
                    self.joiner_voids[s] += 1
            # Joiners whose joining transmission just collided start counting
            # voids from the next round.
            for i in range(self.txj_len):
                self.joiner_voids[self.txj[i]] = 0
        self.txj_len = 0

    cdef void prep_qb(self):
        cdef long front, i
        for i in range(self.new_joiners_len):
            self.txj[self.txj_len] = self.new_joiners[i]
            self.txj_len += 1
        self.new_joiners_len = 0
        self.ntx = 0
        if self.positioned_count > 0:
            front = self.by_absp[self.front_counter % self.n]
            self.ntx = 1
            self.tx_station = front
            self.tx_joiner = 0
            self.tx_over = 1 if self.rings[front].size == 1 else 0
            self.tx_q = self.q_msg
        for i in range(self.txj_len):
            self.ntx += 1
            if self.ntx == 1:
                self.tx_station = self.txj[i]
                self.tx_joiner = 1
                self.tx_over = 1 if self.rings[self.tx_station].size == 1 else 0

    cdef void update_backoff(self, int event, long long t):
        cdef long i, s, slot
        cdef long long wlen
        if event == EV_HEARD:
            s = self.tx_list[0]
            self.attempts[s] = 0
            if self.rings[s].size > 0:
                heap_push(&self.heap, t + 1, s)
        else:
            for i in range(self.tx_list_len):
                s = self.tx_list[i]
                self.attempts[s] += 1
                wlen = self.window_len(self.attempts[s])
                slot = draw_randint(self.st_rng[s], wlen) if wlen > 1 else 0
                heap_push(&self.heap, t + 1 + slot, s)
        self.tx_list_len = 0

    cdef void prep_backoff(self, long long next_t):
        self.tx_list_len = 0
        while self.heap.size > 0 and self.heap.rnd[0] == next_t:
            self.tx_list[self.tx_list_len] = heap_pop(&self.heap)
            self.tx_list_len += 1
        self.ntx = self.tx_list_len
        if self.ntx == 1:
            self.tx_station = self.tx_list[0]

    cdef inline long long window_len(self, long k) noexcept nogil:
        cdef long e = k
        if self.quadratic:
            if self.window_cap and e > self.window_cap:
                e = self.window_cap
            if e > 2147483647:
                e = 2147483647
            return (<long long> e) * (<long long> e)
        if self.window_cap and e > self.window_cap:
            e = self.window_cap
        if e > 62:
            e = 62
        return (<long long> 1) << e

    # -- invariants ---------------------------------------------------------------------

    cdef void check_contiguous(self) except *:
        cdef long i, cnt, expect, pending
        if self.algo == A_CB:
            # After prep, the station activated this round sits in newcomer_fly.
            expect = self.stack_len + (1 if self.newcomer_fly >= 0 else 0)
            if expect != self.active_count:
                raise RuntimeError("counting-backoff stack diverged from active set")
        else:
            cnt = 0
            pending = 0
            for i in range(self.n):
                if self.positioned[i]:
                    cnt += 1
                    if not (self.front_counter <= self.absp[i]
                            < self.front_counter + self.positioned_count):
                        raise RuntimeError("queue-backoff positions not contiguous")
                if self.joiner_voids[i] >= 0:
                    pending += 1
            if cnt != self.positioned_count:
                raise RuntimeError("queue-backoff positioned count diverged")
            if self.q_msg != self.positioned_count + pending:
                raise RuntimeError("queue-backoff size estimate diverged")

    # -- the round loop -------------------------------------------------------------------

    def run(self, long long horizon):
        cdef long long t, pid, inj_rnd, delay, generated
        cdef int event
        cdef long s, i, k, entries, cnt, activations, delivered_station
        cdef bint was_empty_start, empty_before
        cdef long *inj_station = <long *> PyMem_Malloc((self.n + 2) * sizeof(long))
        cdef long *inj_count = <long *> PyMem_Malloc((self.n + 2) * sizeof(long))
        if horizon < 0 and self.ledger_k <= 0:
            PyMem_Free(inj_station)
            PyMem_Free(inj_count)
            raise ValueError("stage-verdict runs need a positive K")
        try:
            while True:
                if horizon >= 0:
                    if self.t >= horizon:
                        break
                elif self.verdict is not None:
                    break
                t = self.t

                # (1)-(2) resolve transmissions; deliver on heard
                if self.ntx == 0:
                    event = EV_SILENCE
                elif self.ntx == 1:
                    event = EV_HEARD
                else:
                    event = EV_COLLISION
                delivered_station = -1
                if event == EV_HEARD:
                    s = self.tx_station
                    ring_pop(&self.rings[s], &pid, &inj_rnd)
                    delay = t - inj_rnd
                    if delay < 1:
                        raise RuntimeError("delivered packet with delay < 1")
                    self.delivered += 1
                    self.total_queued -= 1
                    if delay > self.max_delay:
                        self.max_delay = delay
                    delivered_station = s
                    if self.rings[s].size == 0:
                        self.active_remove(s)
                    self.ledger_delivery(pid, delay)
                    if self.algo == A_OF_RRW:
                        self.old_count[s] -= 1
                    elif self.algo == A_OF_SRR:
                        self.old_count[s] -= 1
                        if self.old_count[s] == 0:
                            fen_add(&self.fen, s, -1)
                    elif self.algo == A_SRR:
                        if self.rings[s].size == 0:
                            fen_add(&self.fen, s, -1)
                elif event == EV_COLLISION and self.check_invariants:
                    if self.algo == A_RRW or self.algo == A_OF_RRW or self.algo == A_MBTF:
                        raise RuntimeError("collision-free algorithm collided")

                # (3) adversary injections for round t
                if self.individual:
                    entries = self.plan_individual(inj_station, inj_count)
                else:
                    entries = self.plan_randomized(inj_station, inj_count)
                activations = 0
                generated = 0
                for i in range(entries):
                    s = inj_station[i]
                    cnt = inj_count[i]
                    was_empty_start = (self.rings[s].size
                                       + (1 if s == delivered_station else 0)) == 0
                    empty_before = self.rings[s].size == 0
                    if was_empty_start:
                        activations += 1
                        if activations > 1:
                            raise RuntimeError("adversary activated two stations in one round")
                        if self.algo == A_CB:
                            self.newcomer_next = s
                        elif self.algo == A_QB:
                            self.new_joiners[self.new_joiners_len] = s
                            self.new_joiners_len += 1
                        elif self.algo >= A_BEB:
                            self.attempts[s] = 0
                            heap_push(&self.heap, t + 1, s)
                        elif self.algo == A_QR:
                            self.act_round[s] = t
                    if empty_before:
                        self.active_insert(s)
                        if self.algo == A_SRR:
                            fen_add(&self.fen, s, 1)
                    for k in range(cnt):
                        ring_push(&self.rings[s], self.next_pid, t)
                        self.next_pid += 1
                    generated += cnt
                if generated:
                    self.injected += generated
                    self.total_queued += generated

                # (4) algorithm update, then commit next round's transmissions
                if self.algo == A_RRW or self.algo == A_OF_RRW:
                    self.update_rrw(event)
                    self.prep_rrw()
                elif self.algo == A_SRR or self.algo == A_OF_SRR:
                    self.update_srr(event)
                    self.prep_srr()
                elif self.algo == A_MBTF:
                    self.update_mbtf(event)
                    self.prep_mbtf()
                elif self.algo == A_CB:
                    self.update_cb(event)
                    self.prep_cb()
                elif self.algo == A_QR:
                    self.update_qr(event, t)
                    self.prep_qr()
                elif self.algo == A_QB:
                    self.update_qb(event)
                    self.prep_qb()
                else:
                    self.update_backoff(event, t)
                    self.prep_backoff(t + 1)

                # (5) metrics, invariants, caps
                if self.total_queued > self.max_total_queue:
                    self.max_total_queue = self.total_queued
                if self.check_invariants:
                    if self.injected != self.delivered + self.total_queued:
                        raise RuntimeError("conservation violated")
                    if self.algo == A_CB or self.algo == A_QB:
                        self.check_contiguous()
                if self.ledger_k > 0 and self.verdict is None and t + 1 >= self.round_cap:
                    self.verdict = "unstable"
                self.t = t + 1
        finally:
            PyMem_Free(inj_station)
            PyMem_Free(inj_count)
        return self.result(horizon)

    def result(self, long long horizon):
        cdef long long worst = 0
        cdef long long age
        cdef long i
        for i in range(self.n):
            if self.rings[i].size > 0:
                age = self.t - ring_head_round(&self.rings[i])
                if age > worst:
                    worst = age
        if horizon >= 0:
            verdict = "horizon"
            avg = None
        else:
            verdict = self.verdict
            avg = self.value if verdict == "stabilized" else None
        return {
            "verdict": verdict,
            "avg_latency": avg,
            "stage_averages": list(self.averages),
            "max_delay": self.max_delay,
            "max_total_queue": self.max_total_queue,
            "rounds": self.t,
            "injected": self.injected,
            "delivered": self.delivered,
            "max_pending_age": worst,
        }


def run(int algo, long n, int cd, double rho, double beta, int individual,
        list rates, object adv_bitgen, list st_bitgens, long long horizon,
        long long k, long stage_cap, long long round_cap, int check_invariants):
    """Execute one run; horizon < 0 means run to the stage-ledger verdict."""
    sim = KernelRun()
    sim.setup(algo, n, cd, rho, beta, individual, rates, adv_bitgen, st_bitgens,
              k, stage_cap, round_cap, check_invariants)
    return sim.run(horizon)
