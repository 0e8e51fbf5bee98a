static const char overflow_note[] = "*** buffer overflow detected ***: terminated";

__attribute__((used, noinline)) const char *fortify_report(void) {
    return overflow_note;
}
