#include <stdio.h>
#include <string.h>
#include "permid.h"

int main(void) {
    char *s = NULL;
    if (permid_count_types(3, 2, &s) != PERMID_STATUS_OK || strcmp(s, "4") != 0) return 1;
    permid_string_free(s);

    PermidCode *code = NULL;
    if (permid_feedback_build(6, 2, 2, 16, 7, &code) != PERMID_STATUS_OK) return 2;
    size_t m = 0;
    if (permid_code_messages(code, &m) != PERMID_STATUS_OK || m != 16) return 3;
    bool pass = false;
    if (permid_feedback_target_test(code, false, &pass, NULL) != PERMID_STATUS_OK) return 4;
    permid_code_free(code);

    if (permid_code_from_json("{", &code) != PERMID_STATUS_FORMAT) return 5;
    if (permid_last_error() == NULL) return 6;
    printf("ok %d\n", (int)pass);
    return 0;
}
