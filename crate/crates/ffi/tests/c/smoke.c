#include <stdio.h>
#include <string.h>

#include "asmprop.h"

#define EXPECT(cond)                                              \
    do {                                                          \
        if (!(cond)) {                                            \
            const char *e = asmprop_last_error();                 \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, \
                    #cond, e ? e : "no error");                   \
            return 1;                                             \
        }                                                         \
    } while (0)

int main(int argc, char **argv) {
    if (argc != 2) {
        return 2;
    }
    FILE *f = fopen(argv[1], "rb");
    EXPECT(f != NULL);
    static char source[1 << 16];
    size_t n = fread(source, 1, sizeof source - 1, f);
    fclose(f);
    source[n] = '\0';

    AsmpropSpec *spec = NULL;
    EXPECT(asmprop_spec_parse(source, &spec) == ASMPROP_STATUS_OK);
    EXPECT(asmprop_spec_add_property(spec, "AG(min = 59 implies AX(min = 0))", ASMPROP_LOGIC_CTL) == ASMPROP_STATUS_OK);
    EXPECT(asmprop_spec_add_property(spec, "AG(minute = 0)", ASMPROP_LOGIC_CTL) == ASMPROP_STATUS_INVALID);
    EXPECT(strstr(asmprop_last_error(), "minute") != NULL);

    AsmpropReport *report = NULL;
    EXPECT(asmprop_spec_check(spec, NULL, &report) == ASMPROP_STATUS_OK);
    AsmpropVerdict verdict = ASMPROP_VERDICT_ERROR;
    EXPECT(asmprop_report_verdict(report, 0, &verdict) == ASMPROP_STATUS_OK);
    EXPECT(verdict == ASMPROP_VERDICT_FAILS);

    char *cex = NULL;
    EXPECT(asmprop_report_export(report, 0, 0, &cex) == ASMPROP_STATUS_OK);
    int passed = 0;
    EXPECT(asmprop_spec_run_scenario(spec, cex, &passed) == ASMPROP_STATUS_OK);
    EXPECT(passed == 1);
    asmprop_string_free(cex);

    char *smv = NULL;
    EXPECT(asmprop_spec_emit_smv(spec, &smv) == ASMPROP_STATUS_OK);
    EXPECT(strstr(smv, "SPEC AG(min = 59 -> AX(min = 0))") != NULL);
    asmprop_string_free(smv);

    asmprop_report_free(report);
    asmprop_spec_free(spec);
    printf("ok %s\n", asmprop_version());
    return 0;
}
