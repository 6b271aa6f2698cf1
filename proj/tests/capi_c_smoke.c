#include <nsda/nsda.h>
#include <stdio.h>
#include <string.h>

/* The header must be consumable as plain C and the basic lifecycle must work
   through the shared library. */
int main(void) {
    if (strlen(nsda_version()) == 0) return 1;
    nsda_config* cfg = NULL;
    if (nsda_config_create(&cfg) != NSDA_OK) return 1;
    if (nsda_config_set(cfg, "grid.modes_per_dim", "64") != NSDA_OK) return 1;
    if (nsda_config_set(cfg, "no.such_key", "1") == NSDA_OK) return 1;
    char* text = NULL;
    if (nsda_config_serialize(cfg, &text) != NSDA_OK) return 1;
    if (strstr(text, "modes_per_dim = 64") == NULL) return 1;
    nsda_string_free(text);
    nsda_config_destroy(cfg);
    printf("ok\n");
    return 0;
}
