#include <math.h>
#include <stdio.h>
#include "hmcf.h"

int main(void) {
    HmcfGroup *g = NULL;
    if (hmcf_group_heisenberg(&g) != HMCF_STATUS_OK) return 1;
    double x[3] = {1.0, 2.0, 3.0}, y[3] = {-0.5, 4.0, 1.0}, xy[3];
    if (hmcf_group_compose(g, x, y, xy) != HMCF_STATUS_OK) return 2;
    if (xy[0] != 0.5 || xy[1] != 6.0 || xy[2] != -1.0) return 3;
    HmcfBarrier *b = NULL;
    if (hmcf_barrier_new(g, HMCF_BARRIER_KIND_CYLINDER, -2.0, 1.0, &b) != HMCF_STATUS_OK) return 4;
    double t = 0.0;
    if (hmcf_barrier_extinction_time(b, &t) != HMCF_STATUS_OK || t != 0.5) return 5;
    if (hmcf_group_norm(NULL, x, &t) != HMCF_STATUS_NULL_POINTER) return 6;
    if (hmcf_last_error_message()[0] == '\0') return 7;
    hmcf_barrier_free(b);
    hmcf_group_free(g);
    printf("ok\n");
    return 0;
}
