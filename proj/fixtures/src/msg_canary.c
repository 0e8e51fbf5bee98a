/* Canary failure message for dynamic builds, with a code reference, mirroring
 * binaries that statically embed their canary runtime while importing the
 * rest of libc. */

static const char canary_note[] = "*** stack smashing detected ***: terminated";

__attribute__((used, noinline)) const char *canary_report(void) {
    return canary_note;
}
