/* Matrix fixture program. Small enough to audit by eye, large enough to
 * exercise every detector: a stack buffer for the canary, an optional
 * fortified copy, and an imported call to force PLT/GOT machinery in
 * dynamic builds. */

#ifndef STATIC_BUILD
extern int ext_ping(int);
extern int stub_value;
#endif

#ifdef USE_FORTIFY
extern void *__memcpy_chk(void *dst, const void *src, unsigned long n,
                          unsigned long dstlen);
#endif

__attribute__((noinline)) int work(const char *s) {
    char buf[16];
    int i = 0;
    while (s[i] && i < 15) {
        buf[i] = s[i];
        ++i;
    }
    buf[i] = 0;
#ifdef USE_FORTIFY
    char dst[32];
    __memcpy_chk(dst, buf, (unsigned long)i, sizeof dst);
    return dst[0] + buf[0];
#else
    return buf[0];
#endif
}

#ifdef STATIC_BUILD
static int ping(int x) { return x + 1; }
#endif

void _start(void) {
    int seed = 41;
#ifdef STATIC_BUILD
    seed = ping(seed);
#else
    seed = ext_ping(seed + stub_value);
#endif
    seed += work("fixture payload");
    (void)seed;
    for (;;)
        ;
}
