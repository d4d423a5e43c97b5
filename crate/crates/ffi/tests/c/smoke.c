#include <stdio.h>
#include <string.h>

#include "keycast.h"

static int check(KcStatus s, const char *what) {
    if (s != KC_OK) {
        char msg[512];
        kc_last_error(msg, sizeof msg, NULL);
        fprintf(stderr, "%s: status %d: %s\n", what, (int)s, msg);
        return 1;
    }
    return 0;
}

int main(void) {
    KcInstance *inst = NULL;
    KcScheme *scheme = NULL;
    KcRun *run = NULL;
    KcReport *report = NULL;
    KcParams params = {-1, -1, -1, -1};
    if (check(kc_instance_generate("fig2", 2, 3, 1, &inst), "generate")) return 1;
    if (check(kc_scheme_compile(inst, "full", params, &scheme), "compile")) return 1;
    if (check(kc_scheme_run(scheme, 7, &run), "run")) return 1;

    uint32_t key[4];
    if (check(kc_run_key(run, 0, key, 4), "key")) return 1;
    uint64_t num, den;
    bool met;
    if (check(kc_run_rate(run, &num, &den, &met), "rate")) return 1;

    if (check(kc_scheme_audit(scheme, 0, &report), "audit")) return 1;
    char text[4096];
    if (check(kc_report_text(report, text, sizeof text, NULL), "text")) return 1;

    printf("key_len=%zu rate=%llu/%llu met=%d passed=%d\n", kc_run_key_len(run), (unsigned long long)num,
           (unsigned long long)den, (int)met, (int)kc_report_passed(report));
    printf("%s", strstr(text, "all ") ? strstr(text, "all ") : text);

    KcInstance *bad = NULL;
    KcStatus s = kc_instance_parse("keycast v1\nfield 4\n", &bad);
    printf("parse status=%d\n", (int)s);

    kc_report_free(report);
    kc_run_free(run);
    kc_scheme_free(scheme);
    kc_instance_free(inst);
    return 0;
}
