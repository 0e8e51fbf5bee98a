/* Static canary runtime: the failure handler embedded libcs ship, message
 * string included. */

static const char canary_note[] = "*** stack smashing detected ***: terminated";

__attribute__((noinline)) static void emit(const char *p) {
    *(volatile const char *)p;
}

unsigned long __stack_chk_guard = 0xaa55aa55UL;

void __stack_chk_fail(void) {
    emit(canary_note);
    for (;;)
        ;
}
