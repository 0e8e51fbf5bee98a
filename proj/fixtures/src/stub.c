/* Shared library every dynamic fixture links against. Exports the canary
 * runtime so protector-enabled builds import it the way a real libc client
 * would. */

int stub_value = 5;

int ext_ping(int x) { return x + 1; }

unsigned long __stack_chk_guard = 0xaa55aa55UL;

void __stack_chk_fail(void) {
    for (;;)
        ;
}

void *__memcpy_chk(void *dst, const void *src, unsigned long n, unsigned long dstlen) {
    char *d = dst;
    const char *s = src;
    if (n > dstlen)
        for (;;)
            ;
    while (n--) *d++ = *s++;
    return dst;
}
