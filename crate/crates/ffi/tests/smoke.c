/* SPDX-License-Identifier: Apache-2.0 */

#include <stdio.h>
#include <string.h>

#include "fixkit.h"

static const char *SOURCE =
    "(defprod student ((name string) (age nat)))"
    "(define student-greeting ((s student)) (student->name s))";

int main(void) {
    FixkitSession *s = NULL;
    char *out = NULL;
    int ok = 1;

    if (fixkit_session_load(SOURCE, &s) != FIXKIT_STATUS_OK) {
        fprintf(stderr, "load: %s\n", fixkit_last_error());
        return 1;
    }
    if (fixkit_fix(s, "student", "(6 \"Calista\")", &out) != FIXKIT_STATUS_OK) {
        ok = 0;
    } else {
        ok &= strcmp(out, "(\"\" 0)") == 0;
        printf("%s\n", out);
        fixkit_string_free(out);
    }
    if (fixkit_eval(s, "(student-greeting 7)", true, &out) != FIXKIT_STATUS_GUARD) {
        ok = 0;
    } else {
        printf("%s\n", fixkit_last_error());
    }
    fixkit_session_free(s);
    return ok ? 0 : 1;
}
