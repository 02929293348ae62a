#include <stdio.h>
#include "congdist.h"

int main(void) {
    CdAlgebra *alg = NULL;
    size_t order = 0;
    bool dist = false;
    if (cd_algebra_from_corpus("median", &alg) != CD_STATUS_OK) return 10;
    if (cd_relational_order(alg, 10, true, &order) != CD_STATUS_OK || order != 1) return 11;
    if (cd_is_distributive(alg, true, &dist) != CD_STATUS_OK || !dist) return 12;
    cd_algebra_free(alg);
    if (cd_algebra_from_corpus("missing", &alg) != CD_STATUS_UNKNOWN_CORPUS) return 13;
    printf("%s\n", cd_last_error());
    return 0;
}
