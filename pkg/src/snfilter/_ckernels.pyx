# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels.

Mirrors :mod:`snfilter._pykernels` function for function; the two must agree
on every input (``tests/test_kernels.py`` checks this).
"""
import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, realloc, free, qsort
from libc.string cimport memset, memcpy, memmove

cnp.import_array()

BACKEND = "cython"

ctypedef cnp.uint16_t word_t

cdef extern from *:
    int __builtin_popcount(unsigned int) nogil
    int __builtin_ctz(unsigned int) nogil

cdef enum:
    MAXN = 16


cdef struct SetInfo:
    const word_t* words
    Py_ssize_t size
    int hist[MAXN + 1]
    int prof[MAXN][MAXN + 1]


cdef struct Search:
    int n
    const SetInfo* a
    const SetInfo* b
    unsigned int cand[MAXN]
    int image[MAXN]
    unsigned int used
    unsigned int done
    int ncells[MAXN + 1]
    int* cell_a
    int* cell_b
    int* count_a
    int* count_b
    int* remap


cdef void fill_info(SetInfo* s, const word_t* words, Py_ssize_t size, int n) noexcept nogil:
    cdef Py_ssize_t t
    cdef unsigned int x
    cdef int k
    s.words = words
    s.size = size
    memset(s.hist, 0, sizeof(s.hist))
    memset(s.prof, 0, sizeof(s.prof))
    for t in range(size):
        x = words[t]
        k = __builtin_popcount(x)
        s.hist[k] += 1
        while x:
            s.prof[__builtin_ctz(x)][k] += 1
            x &= x - 1


cdef bint hist_fits(const SetInfo* a, const SetInfo* b, int n) noexcept nogil:
    cdef int k
    if a.size > b.size:
        return False
    for k in range(n + 1):
        if a.hist[k] > b.hist[k]:
            return False
    return True


cdef bint channel_candidates(Search* s) noexcept nogil:
    cdef int i, j, k, n = s.n, pa, pb
    cdef unsigned int m
    cdef bint ok
    cdef const SetInfo* a = s.a
    cdef const SetInfo* b = s.b
    for i in range(n):
        m = 0
        for j in range(n):
            ok = True
            for k in range(n + 1):
                pa = a.prof[i][k]
                pb = b.prof[j][k]
                if pa > pb or a.hist[k] - pa > b.hist[k] - pb:
                    ok = False
                    break
            if ok:
                m |= 1u << j
        if m == 0:
            return False
        s.cand[i] = m
    return True


cdef bint kuhn(const unsigned int* cand, int i, int* owner, unsigned int* seen) noexcept nogil:
    cdef unsigned int m = cand[i] & ~seen[0]
    cdef int j
    while m:
        j = __builtin_ctz(m)
        m &= m - 1
        seen[0] |= 1u << j
        if owner[j] < 0 or kuhn(cand, owner[j], owner, seen):
            owner[j] = i
            return True
    return False


cdef bint perfect_matching(const unsigned int* cand, int n) noexcept nogil:
    cdef int owner[MAXN]
    cdef unsigned int seen
    cdef int i
    for i in range(n):
        owner[i] = -1
    for i in range(n):
        seen = 0
        if not kuhn(cand, i, owner, &seen):
            return False
    return True


cdef int refine(Search* s, int depth, int i, int j) noexcept nogil:
    """Split every cell by channel i (A side) / channel j (B side).

    Returns the new cell count, or -1 when some A cell outgrows its B cell.
    """
    cdef Py_ssize_t asz = s.a.size, bsz = s.b.size, t
    cdef int nc = s.ncells[depth], raw = 2 * nc, r, m
    cdef int* cur_a = s.cell_a + depth * asz
    cdef int* nxt_a = cur_a + asz
    cdef int* cur_b = s.cell_b + depth * bsz
    cdef int* nxt_b = cur_b + bsz
    cdef const word_t* aw = s.a.words
    cdef const word_t* bw = s.b.words
    memset(s.count_a, 0, raw * sizeof(int))
    memset(s.count_b, 0, raw * sizeof(int))
    for t in range(bsz):
        r = 2 * cur_b[t] + ((bw[t] >> j) & 1)
        nxt_b[t] = r
        s.count_b[r] += 1
    for t in range(asz):
        r = 2 * cur_a[t] + ((aw[t] >> i) & 1)
        nxt_a[t] = r
        s.count_a[r] += 1
        if s.count_a[r] > s.count_b[r]:
            return -1
    m = 0
    for r in range(raw):
        if s.count_b[r]:
            s.remap[r] = m
            m += 1
    for t in range(asz):
        nxt_a[t] = s.remap[nxt_a[t]]
    for t in range(bsz):
        nxt_b[t] = s.remap[nxt_b[t]]
    return m


cdef bint descend(Search* s, int depth) noexcept nogil:
    cdef int n = s.n, i, j, best = -1, bestc = MAXN + 1, c, nc
    cdef unsigned int m
    if depth == n:
        return True
    for i in range(n):
        if not (s.done >> i) & 1:
            c = __builtin_popcount(s.cand[i] & ~s.used)
            if c < bestc:
                best = i
                bestc = c
    if bestc == 0:
        return False
    m = s.cand[best] & ~s.used
    while m:
        j = __builtin_ctz(m)
        m &= m - 1
        nc = refine(s, depth, best, j)
        if nc < 0:
            continue
        s.ncells[depth + 1] = nc
        s.image[best] = j
        s.used |= 1u << j
        s.done |= 1u << best
        if descend(s, depth + 1):
            return True
        s.used &= ~(1u << j)
        s.done &= ~(1u << best)
        s.image[best] = -1
    return False


cdef bint contains(const SetInfo* b, unsigned int y) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = b.size, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if b.words[mid] < y:
            lo = mid + 1
        else:
            hi = mid
    return lo < b.size and b.words[lo] == y


cdef bint image_subset(const SetInfo* a, const SetInfo* b, const int* image, int n) noexcept nogil:
    cdef Py_ssize_t t
    cdef unsigned int x, y
    cdef int i
    for t in range(a.size):
        x = a.words[t]
        y = 0
        while x:
            i = __builtin_ctz(x)
            y |= 1u << image[i]
            x &= x - 1
        if not contains(b, y):
            return False
    return True


cdef int embed(const SetInfo* a, const SetInfo* b, int n, int* image_out) noexcept nogil:
    """1 if some channel bijection maps a into b (image in image_out), 0 if
    none exists, -1 on allocation failure."""
    cdef Search s
    cdef int i, k, result
    cdef Py_ssize_t t, cap
    if not hist_fits(a, b, n):
        return 0
    if a.size == 0:
        for i in range(n):
            image_out[i] = i
        return 1
    s.n = n
    s.a = a
    s.b = b
    if not channel_candidates(&s):
        return 0
    if not perfect_matching(s.cand, n):
        return 0
    cap = 2 * (b.size + n + 2)
    s.cell_a = <int*> malloc((n + 1) * a.size * sizeof(int))
    s.cell_b = <int*> malloc((n + 1) * b.size * sizeof(int))
    s.count_a = <int*> malloc(cap * sizeof(int))
    s.count_b = <int*> malloc(cap * sizeof(int))
    s.remap = <int*> malloc(cap * sizeof(int))
    if not (s.cell_a and s.cell_b and s.count_a and s.count_b and s.remap):
        free(s.cell_a); free(s.cell_b); free(s.count_a); free(s.count_b); free(s.remap)
        return -1
    for t in range(a.size):
        s.cell_a[t] = __builtin_popcount(a.words[t])
    for t in range(b.size):
        s.cell_b[t] = __builtin_popcount(b.words[t])
    s.ncells[0] = n + 1
    s.used = 0
    s.done = 0
    for i in range(n):
        s.image[i] = -1
    result = 0
    if descend(&s, 0) and image_subset(a, b, s.image, n):
        for i in range(n):
            image_out[i] = s.image[i]
        result = 1
    free(s.cell_a); free(s.cell_b); free(s.count_a); free(s.count_b); free(s.remap)
    return result


def _as_words(words):
    return np.ascontiguousarray(words, dtype=np.uint16)


def find_embedding(a_words, b_words, int n):
    """Return ``image`` (0-based, ``image[i]`` = target of channel i) with
    image(a) a subset of b, or None."""
    if not 1 <= n <= MAXN:
        raise ValueError(f"n must be in 1..{MAXN}, got {n}")
    a = _as_words(a_words)
    b = _as_words(b_words)
    cdef const word_t[::1] av = a
    cdef const word_t[::1] bv = b
    cdef SetInfo ai, bi
    cdef int image[MAXN]
    cdef int rc
    cdef const word_t* ap = &av[0] if av.shape[0] else NULL
    cdef const word_t* bp = &bv[0] if bv.shape[0] else NULL
    with nogil:
        fill_info(&ai, ap, av.shape[0], n)
        fill_info(&bi, bp, bv.shape[0], n)
        rc = embed(&ai, &bi, n, image)
    if rc < 0:
        raise MemoryError("embedding search allocation failed")
    if rc == 0:
        return None
    return [image[i] for i in range(n)]


cdef class SetBank:
    """Growing collection of sets probed with :meth:`first_subsumer`.

    Entries are scanned in ascending key order, so the first hit is the
    smallest-key subsumer.
    """
    cdef readonly int n
    cdef SetInfo* infos
    cdef long long* keys
    cdef Py_ssize_t* seqs
    cdef Py_ssize_t* order
    cdef Py_ssize_t count, capacity
    cdef list _arrays

    def __cinit__(self, int n):
        if not 1 <= n <= MAXN:
            raise ValueError(f"n must be in 1..{MAXN}, got {n}")
        self.n = n
        self.count = 0
        self.capacity = 0
        self.infos = NULL
        self.keys = NULL
        self.seqs = NULL
        self.order = NULL
        self._arrays = []

    def __dealloc__(self):
        free(self.infos)
        free(self.keys)
        free(self.seqs)
        free(self.order)

    def __len__(self):
        return self.count

    cdef void _grow(self) except *:
        cdef Py_ssize_t cap = max(16, 2 * self.capacity)
        cdef void* p
        p = realloc(self.infos, cap * sizeof(SetInfo))
        if not p:
            raise MemoryError()
        self.infos = <SetInfo*> p
        p = realloc(self.keys, cap * sizeof(long long))
        if not p:
            raise MemoryError()
        self.keys = <long long*> p
        p = realloc(self.seqs, cap * sizeof(Py_ssize_t))
        if not p:
            raise MemoryError()
        self.seqs = <Py_ssize_t*> p
        p = realloc(self.order, cap * sizeof(Py_ssize_t))
        if not p:
            raise MemoryError()
        self.order = <Py_ssize_t*> p
        self.capacity = cap

    def add(self, words, long long key):
        """Insert a set; returns its insertion sequence number."""
        arr = _as_words(words)
        cdef const word_t[::1] v = arr
        cdef Py_ssize_t pos, slot
        if self.count == self.capacity:
            self._grow()
        self._arrays.append(arr)
        slot = self.count
        fill_info(&self.infos[slot], &v[0] if v.shape[0] else NULL, v.shape[0], self.n)
        self.keys[slot] = key
        self.seqs[slot] = slot
        pos = self.count
        while pos > 0 and self.keys[self.order[pos - 1]] > key:
            pos -= 1
        memmove(&self.order[pos + 1], &self.order[pos], (self.count - pos) * sizeof(Py_ssize_t))
        self.order[pos] = slot
        self.count += 1
        return slot

    def first_subsumer(self, b_words, Py_ssize_t since=0):
        """Smallest key among entries (inserted at sequence >= since) that
        embed into ``b_words``; -1 when none does."""
        b = _as_words(b_words)
        cdef const word_t[::1] bv = b
        cdef SetInfo bi
        cdef int image[MAXN]
        cdef Py_ssize_t t, slot
        cdef long long found = -1
        cdef int rc = 0
        with nogil:
            fill_info(&bi, &bv[0] if bv.shape[0] else NULL, bv.shape[0], self.n)
            for t in range(self.count):
                slot = self.order[t]
                if slot < since:
                    continue
                rc = embed(&self.infos[slot], &bi, self.n, image)
                if rc != 0:
                    if rc > 0:
                        found = self.keys[slot]
                    break
        if rc < 0:
            raise MemoryError("embedding search allocation failed")
        return found


cdef int cmp_word(const void* x, const void* y) noexcept nogil:
    return (<const word_t*> x)[0] - (<const word_t*> y)[0]


cdef Py_ssize_t canonical_tail(word_t* out, Py_ssize_t start, Py_ssize_t pos,
                               int* stamp, int tag, int n) noexcept nogil:
    """Sort out[start:pos] (distinct words, all stamped with tag)."""
    cdef Py_ssize_t cnt = pos - start, y, k = start
    if cnt * 16 > (1 << n):
        for y in range(1 << n):
            if stamp[y] == tag:
                out[k] = <word_t> y
                k += 1
    else:
        qsort(&out[start], cnt, sizeof(word_t), cmp_word)
    return pos


def apply_levels(words, int n, comp_lo, comp_hi, level_offsets):
    """Apply every packed level to ``words``.

    Level t owns comparators ``level_offsets[t]:level_offsets[t+1]`` of the
    0-based bit arrays comp_lo/comp_hi.  Returns ``(out, offsets)`` where
    ``out[offsets[t]:offsets[t+1]]`` is the canonical image set of level t.
    """
    w = _as_words(words)
    lo = np.ascontiguousarray(comp_lo, dtype=np.int32)
    hi = np.ascontiguousarray(comp_hi, dtype=np.int32)
    lo_off = np.ascontiguousarray(level_offsets, dtype=np.int64)
    cdef Py_ssize_t nlev = lo_off.shape[0] - 1, sz = w.shape[0]
    out = np.empty(max(1, nlev * sz), dtype=np.uint16)
    offsets = np.zeros(nlev + 1, dtype=np.int64)
    cdef const word_t[::1] wv = w
    cdef const int[::1] lov = lo
    cdef const int[::1] hiv = hi
    cdef const long long[::1] offv = lo_off
    cdef word_t[::1] ov = out
    cdef long long[::1] resv = offsets
    cdef int* stamp = <int*> malloc((1 << n) * sizeof(int))
    if not stamp:
        raise MemoryError()
    cdef Py_ssize_t t, s, c, pos = 0, start
    cdef unsigned int y, p, q
    with nogil:
        for s in range(1 << n):
            stamp[s] = -1
        for t in range(nlev):
            start = pos
            for s in range(sz):
                y = wv[s]
                for c in range(offv[t], offv[t + 1]):
                    p = lov[c]
                    q = hiv[c]
                    if ((y >> p) & 1) and not ((y >> q) & 1):
                        y ^= (1u << p) | (1u << q)
                if stamp[y] != t:
                    stamp[y] = <int> t
                    ov[pos] = <word_t> y
                    pos += 1
            canonical_tail(&ov[0], start, pos, stamp, <int> t, n)
            resv[t + 1] = pos
    free(stamp)
    return out[:pos].copy(), offsets


def reflect_sets(words, offsets, int n):
    """Reflect every set of a concatenated batch; same offsets on output."""
    w = _as_words(words)
    off = np.ascontiguousarray(offsets, dtype=np.int64)
    out = np.empty(max(1, w.shape[0]), dtype=np.uint16)
    cdef const word_t[::1] wv = w
    cdef const long long[::1] offv = off
    cdef word_t[::1] ov = out
    cdef Py_ssize_t nsets = offv.shape[0] - 1, t, s, k
    cdef unsigned int x, y, mask = (1u << n) - 1
    cdef int i
    cdef int* stamp = <int*> malloc((1 << n) * sizeof(int))
    if not stamp:
        raise MemoryError()
    with nogil:
        for s in range(1 << n):
            stamp[s] = -1
        for t in range(nsets):
            for s in range(offv[t], offv[t + 1]):
                x = wv[s]
                y = 0
                for i in range(n):
                    if (x >> i) & 1:
                        y |= 1u << (n - 1 - i)
                y = ~y & mask
                stamp[y] = <int> t
                ov[s] = <word_t> y
            canonical_tail(&ov[0], offv[t], offv[t + 1], stamp, <int> t, n)
    free(stamp)
    return out[:w.shape[0]].copy()
